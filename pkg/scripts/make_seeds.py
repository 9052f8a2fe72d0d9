"""Render the ten shipped seed glyphs the way MNIST digits were prepared.

    npm pack @fontsource/pt-sans-narrow && tar xzf fontsource-pt-sans-narrow-*.tgz
    python scripts/make_seeds.py package/files/pt-sans-narrow-latin-700-normal.woff \
        src/digitmt/data/seeds

Each digit is drawn large, cropped to its ink, resized so the longer side is
20 pixels (aspect ratio kept), pasted into a 28x28 frame and shifted so its
center of mass sits at the frame center.  Annotation files are written
separately (see ``scripts/annotate_seeds.py``).
"""
import argparse
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from digitmt.imaging import center_digit, write_pgm

RENDER_SIZE = 128
BOX = 20
FRAME = 28


def render_digit(font: ImageFont.FreeTypeFont, digit: int) -> np.ndarray:
    canvas = Image.new("L", (RENDER_SIZE * 2, RENDER_SIZE * 2))
    ImageDraw.Draw(canvas).text((RENDER_SIZE // 2, RENDER_SIZE // 4), str(digit), fill=255, font=font)
    glyph = canvas.crop(canvas.getbbox())
    scale = BOX / max(glyph.size)
    size = (max(1, round(glyph.width * scale)), max(1, round(glyph.height * scale)))
    glyph = glyph.resize(size, Image.LANCZOS)
    frame = Image.new("L", (FRAME, FRAME))
    frame.paste(glyph, ((FRAME - size[0]) // 2, (FRAME - size[1]) // 2))
    return center_digit(np.asarray(frame))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("font", type=Path)
    parser.add_argument("out_dir", type=Path)
    args = parser.parse_args()
    font = ImageFont.truetype(str(args.font), RENDER_SIZE)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for digit in range(10):
        write_pgm(render_digit(font, digit), args.out_dir / f"digit_{digit}.pgm")
    print(f"wrote 10 seeds to {args.out_dir}")


if __name__ == "__main__":
    main()
