"""Minimal deterministic SVG writer: fixed float formatting, no metadata."""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _f(v: float) -> str:
    return f"{v:.2f}"


class Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts = []

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{width:g}"{extra}/>'
        )

    def polyline(self, xy, stroke, width=1.5, label=None):
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in xy)
        title = f"<title>{escape(label)}</title>" if label else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width:g}">'
            f"{title}</polyline>"
        )

    def rect(self, x, y, w, h, fill, opacity=1.0, label=None):
        title = f"<title>{escape(label)}</title>" if label else ""
        self.parts.append(
            f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}" '
            f'fill-opacity="{opacity:g}">{title}</rect>'
        )

    def circle(self, x, y, r, fill):
        self.parts.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r:g}" fill="{fill}"/>')

    def text(self, x, y, s, size=11, anchor="start", rotate=None, fill="#000"):
        transform = f' transform="rotate({rotate:g} {_f(x)} {_f(y)})"' if rotate else ""
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{fill}"{transform}>{escape(s)}</text>'
        )

    def render(self, title: str = "") -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
        )
        if title:
            head += f"<title>{escape(title)}</title>\n"
        head += f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
        return head + "\n".join(self.parts) + "\n</svg>\n"


class Axes:
    """Maps data coordinates onto a plotting rectangle of a Canvas."""

    def __init__(self, canvas: Canvas, left=60, right=170, top=40, bottom=70,
                 xlim=(0.0, 1.0), ylim=(0.0, 1.0)):
        self.c = canvas
        self.x0, self.x1 = left, canvas.width - right
        self.y0, self.y1 = canvas.height - bottom, top
        self.xlim, self.ylim = xlim, ylim

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * (self.x1 - self.x0)

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 - (y - lo) / (hi - lo) * (self.y0 - self.y1)

    def frame(self, xlabel="", ylabel="", title=""):
        c = self.c
        c.line(self.x0, self.y0, self.x1, self.y0)
        c.line(self.x0, self.y0, self.x0, self.y1)
        if title:
            c.text((self.x0 + self.x1) / 2, self.y1 - 16, title, size=13, anchor="middle")
        if xlabel:
            c.text((self.x0 + self.x1) / 2, self.y0 + 44, xlabel, anchor="middle")
        if ylabel:
            c.text(self.x0 - 44, (self.y0 + self.y1) / 2, ylabel, anchor="middle", rotate=-90)

    def yticks(self, ticks, fmt="{:.1f}", right=False):
        x = self.x1 if right else self.x0
        d = 5 if right else -5
        for t in ticks:
            y = self.py(t)
            self.c.line(x, y, x + d, y)
            self.c.text(x + 2 * d, y + 4, fmt.format(t), size=10,
                        anchor="start" if right else "end")

    def xticks(self, ticks, fmt="{:.1f}"):
        for t in ticks:
            x = self.px(t)
            self.c.line(x, self.y0, x, self.y0 + 5)
            self.c.text(x, self.y0 + 18, fmt.format(t), size=10, anchor="middle")

    def legend(self, labels):
        x = self.x1 + 15
        for i, label in enumerate(labels):
            y = self.y1 + 14 * i + 6
            color = PALETTE[i % len(PALETTE)]
            self.c.line(x, y - 4, x + 18, y - 4, stroke=color, width=2.5)
            self.c.text(x + 24, y, label, size=10)

