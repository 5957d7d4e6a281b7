#!/usr/bin/env python3
"""Rasterise a seongdo chart SVG to PNG for eyeballing.

Understands only what the chart renderer emits: rect background, circles,
lines and text. Usage: svg_preview.py chart.svg preview.png
"""
import sys
import xml.etree.ElementTree as ET

from PIL import Image, ImageDraw, ImageFont

NS = "{http://www.w3.org/2000/svg}"


def main(src, dst):
    root = ET.parse(src).getroot()
    size = int(float(root.get("width")))
    img = Image.new("RGB", (size, size), "#05070f")
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default()
    for group in root.iter(NS + "g"):
        stroke = group.get("stroke")
        fill = group.get("fill")
        for el in group:
            tag = el.tag[len(NS):]
            if tag == "circle":
                cx, cy, r = (float(el.get(k)) for k in ("cx", "cy", "r"))
                box = [cx - r, cy - r, cx + r, cy + r]
                if el.get("fill"):
                    draw.ellipse(box, fill=el.get("fill"))
                else:
                    draw.ellipse(box, outline=stroke)
            elif tag == "line":
                xy = [float(el.get(k)) for k in ("x1", "y1", "x2", "y2")]
                draw.line(xy, fill=stroke, width=1)
            elif tag == "text":
                draw.text((float(el.get("x")), float(el.get("y"))), el.text or "", fill=fill, font=font,
                          anchor="ms")
    img.save(dst)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
