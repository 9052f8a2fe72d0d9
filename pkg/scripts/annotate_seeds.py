"""Draft segment annotations for the shipped seeds and print them for review.

    python scripts/annotate_seeds.py src/digitmt/data/seeds [--write]

Segments are the longest runs between Ramer-Douglas-Peucker vertices of each
seed's outer contour, closed on both corner vertices and pairwise disjoint, as
many per digit as the shipped segment counts ask for.  The coarsest epsilon in
``EPSILONS`` that yields enough such runs is used.
Without ``--write`` the drafts are only printed, with the contour drawn as
ASCII (segment points as letters, moving end points upper-case).
"""
import argparse
from pathlib import Path

import numpy as np

from digitmt.errors import TooFewVertices
from digitmt.imaging import binarize, center_digit, read_pgm
from digitmt.objectmorph.contours import trace_contours
from digitmt.objectmorph.segments import SEGMENT_COUNTS, format_annotations, suggest_segments

# coarsest simplification first; finer ones only when a digit needs more corners
EPSILONS = (1.0, 0.75, 0.5)
END_WINDOW = 2


def draw(img, contour, segments) -> str:
    canvas = np.where(img >= 128, ".", " ").astype(object)
    for x, y in contour.points.astype(int):
        canvas[y, x] = "+"
    for letter, seg in zip("abcdefgh", segments):
        for i in range(seg.start, seg.end):
            moving = i < seg.start + seg.end_window or i >= seg.end - seg.end_window
            x, y = contour.points[i].astype(int)
            canvas[y, x] = letter.upper() if moving else letter
    return "\n".join("".join(row) for row in canvas)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("seeds_dir", type=Path)
    parser.add_argument("--write", action="store_true")
    args = parser.parse_args()
    for digit in range(10):
        img = center_digit(read_pgm(args.seeds_dir / f"digit_{digit}.pgm"))
        outer = trace_contours(binarize(img))[0]
        for epsilon in EPSILONS:
            try:
                segments = suggest_segments(outer, epsilon, SEGMENT_COUNTS[digit], 0, END_WINDOW, close_ends=True)
                break
            except TooFewVertices:
                continue
        else:
            raise SystemExit(f"digit {digit}: no epsilon in {EPSILONS} gives {SEGMENT_COUNTS[digit]} segments")
        print(f"digit {digit} (epsilon {epsilon})")
        print(format_annotations(segments))
        print(draw(img, outer, segments))
        if args.write:
            (args.seeds_dir / f"digit_{digit}.seg").write_text(format_annotations(segments))


if __name__ == "__main__":
    main()
