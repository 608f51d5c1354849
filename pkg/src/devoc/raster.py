"""Binary raster images plus the preprocessing chain.

Images are 2-D numpy bool arrays, shape (height, width), True = foreground
ink. All functions are pure and never modify their arguments.

The preprocessing chain turns a raw glyph into a 100x100 one-pixel-wide
skeleton: bounding-box crop -> thicken -> thin -> prune -> normalize
(which re-thins after scaling).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

NORM_SIZE = 100

_EIGHT = np.ones((3, 3), dtype=int)


class RasterError(Exception):
    """Base class for raster failures."""


class MalformedHeaderError(RasterError):
    pass


class DimensionMismatchError(RasterError):
    pass


class EmptyImageError(RasterError):
    pass


class BoxOutOfRangeError(RasterError):
    pass


class OutOfBoundsError(RasterError):
    pass


@dataclass(frozen=True)
class BoundingBox:
    row_min: int
    row_max: int
    col_min: int
    col_max: int

    @property
    def height(self):
        return self.row_max - self.row_min + 1

    @property
    def width(self):
        return self.col_max - self.col_min + 1


# ---------------------------------------------------------------------------
# Netpbm I/O


class _TokenReader:
    """Whitespace/comment-aware token scanner over a netpbm buffer."""

    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def next_token(self):
        buf, n = self.buf, len(self.buf)
        i = self.pos
        while i < n:
            c = buf[i : i + 1]
            if c in b" \t\r\n":
                i += 1
            elif c == b"#":
                j = buf.find(b"\n", i)
                i = n if j < 0 else j + 1
            else:
                break
        if i >= n:
            raise MalformedHeaderError("unexpected end of header")
        j = i
        while j < n and buf[j : j + 1] not in b" \t\r\n#":
            j += 1
        self.pos = j
        return buf[i:j]

    def next_int(self):
        tok = self.next_token()
        try:
            return int(tok)
        except ValueError:
            raise MalformedHeaderError("expected integer, got %r" % tok)

    def skip_single_whitespace(self):
        # binary rasters start exactly one whitespace byte after the header
        if self.pos < len(self.buf) and self.buf[self.pos : self.pos + 1] in b" \t\r\n":
            self.pos += 1


def _read_file(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise RasterError("cannot read %s: %s" % (path, exc))


def _check_dims(width, height):
    if width < 1 or height < 1:
        raise MalformedHeaderError("bad dimensions %dx%d" % (width, height))


def load_pbm(path):
    """Read a P1 (ascii) or P4 (packed) PBM. PBM value 1 -> foreground."""
    buf = _read_file(path)
    rd = _TokenReader(buf)
    magic = rd.next_token()
    if magic not in (b"P1", b"P4"):
        raise MalformedHeaderError("not a PBM file (magic %r)" % magic)
    width = rd.next_int()
    height = rd.next_int()
    _check_dims(width, height)
    if magic == b"P1":
        body = buf[rd.pos :]
        bits = []
        i, n = 0, len(body)
        while i < n:
            c = body[i : i + 1]
            if c == b"#":
                j = body.find(b"\n", i)
                i = n if j < 0 else j + 1
                continue
            if c == b"0":
                bits.append(0)
            elif c == b"1":
                bits.append(1)
            elif c not in b" \t\r\n":
                raise MalformedHeaderError("bad P1 pixel byte %r" % c)
            i += 1
        if len(bits) != width * height:
            raise DimensionMismatchError(
                "P1 raster has %d pixels, header says %d" % (len(bits), width * height)
            )
        return np.array(bits, dtype=bool).reshape(height, width)
    # P4: rows padded to whole bytes
    rd.skip_single_whitespace()
    row_bytes = (width + 7) // 8
    raster = buf[rd.pos : rd.pos + row_bytes * height]
    if len(raster) != row_bytes * height:
        raise DimensionMismatchError("P4 raster truncated")
    bits = np.unpackbits(np.frombuffer(raster, dtype=np.uint8).reshape(height, row_bytes), axis=1)
    return bits[:, :width].astype(bool)


def load_pgm(path, threshold_frac=0.5):
    """Read a P2/P5 PGM and binarize: darker half of the range -> foreground."""
    buf = _read_file(path)
    rd = _TokenReader(buf)
    magic = rd.next_token()
    if magic not in (b"P2", b"P5"):
        raise MalformedHeaderError("not a PGM file (magic %r)" % magic)
    width = rd.next_int()
    height = rd.next_int()
    maxval = rd.next_int()
    _check_dims(width, height)
    if maxval < 1 or maxval > 65535:
        raise MalformedHeaderError("bad maxval %d" % maxval)
    n = width * height
    if magic == b"P2":
        vals = []
        for _ in range(n):
            try:
                vals.append(rd.next_int())
            except MalformedHeaderError:
                raise DimensionMismatchError("P2 raster truncated")
        grid = np.array(vals).reshape(height, width)
    else:
        rd.skip_single_whitespace()
        itemsize = 1 if maxval < 256 else 2
        raster = buf[rd.pos : rd.pos + n * itemsize]
        if len(raster) != n * itemsize:
            raise DimensionMismatchError("P5 raster truncated")
        dtype = np.uint8 if itemsize == 1 else ">u2"
        grid = np.frombuffer(raster, dtype=dtype).reshape(height, width).astype(int)
    return grid <= maxval * threshold_frac


def load_image(path):
    """Dispatch on the netpbm magic number (PBM P1/P4, PGM P2/P5)."""
    buf = _read_file(path)
    magic = buf[:2]
    if magic in (b"P1", b"P4"):
        return load_pbm(path)
    if magic in (b"P2", b"P5"):
        return load_pgm(path)
    raise MalformedHeaderError("unsupported netpbm magic %r" % magic)


def save_pbm(path, img):
    """Write a plain-text P1 PBM (foreground = 1)."""
    img = np.asarray(img, dtype=bool)
    h, w = img.shape
    lines = ["P1", "%d %d" % (w, h)]
    for row in img.astype(np.uint8):
        lines.append("".join("1" if v else "0" for v in row))
    data = ("\n".join(lines) + "\n").encode("ascii")
    atomic_write_bytes(path, data)


def atomic_write_bytes(path, data):
    tmp = "%s.tmp.%d" % (path, os.getpid())
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Geometry


def bounding_box(img):
    """Tight rectangle around all foreground pixels."""
    rows = np.flatnonzero(img.any(axis=1))
    if rows.size == 0:
        raise EmptyImageError("image has no foreground pixels")
    cols = np.flatnonzero(img.any(axis=0))
    return BoundingBox(int(rows[0]), int(rows[-1]), int(cols[0]), int(cols[-1]))


def crop(img, box):
    h, w = img.shape
    if not (0 <= box.row_min <= box.row_max < h and 0 <= box.col_min <= box.col_max < w):
        raise BoxOutOfRangeError("box %r exceeds %dx%d image" % (box, h, w))
    return img[box.row_min : box.row_max + 1, box.col_min : box.col_max + 1].copy()


def neighbor_count(img, row, col):
    """Foreground pixels among the 8-neighborhood; off-image counts as background."""
    h, w = img.shape
    if not (0 <= row < h and 0 <= col < w):
        raise OutOfBoundsError("(%d,%d) outside %dx%d" % (row, col, h, w))
    r0, r1 = max(row - 1, 0), min(row + 2, h)
    c0, c1 = max(col - 1, 0), min(col + 2, w)
    total = int(img[r0:r1, c0:c1].sum())
    return total - int(img[row, col])


def neighbor_count_grid(img):
    """8-neighbor foreground counts for every pixel, vectorized."""
    p = np.pad(img, 1).astype(np.uint8)
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.int32)
    for dr in (0, 1, 2):
        for dc in (0, 1, 2):
            if dr == 1 and dc == 1:
                continue
            out += p[dr : dr + h, dc : dc + w]
    return out


# ---------------------------------------------------------------------------
# Morphology


def thicken(img):
    """One pass of 3x3 dilation (bridges 1-2 pixel gaps from shaky strokes)."""
    h, w = img.shape
    p = np.pad(img, 1)
    out = np.zeros((h, w), dtype=bool)
    for dr in (0, 1, 2):
        for dc in (0, 1, 2):
            out |= p[dr : dr + h, dc : dc + w]
    return out


def _zs_ring(skel):
    """The 8 neighbor planes in Zhang-Suen order P2..P9 (N, NE, E, SE, S, SW, W, NW)."""
    p = np.pad(skel, 1)
    h, w = skel.shape
    return (
        p[0:h, 1 : w + 1],       # P2 N
        p[0:h, 2 : w + 2],       # P3 NE
        p[1 : h + 1, 2 : w + 2], # P4 E
        p[2 : h + 2, 2 : w + 2], # P5 SE
        p[2 : h + 2, 1 : w + 1], # P6 S
        p[2 : h + 2, 0:w],       # P7 SW
        p[1 : h + 1, 0:w],       # P8 W
        p[0:h, 0:w],             # P9 NW
    )


def _spare_doomed(skel, dele):
    # parallel deletion can wipe out tiny components (isolated 2x2 squares);
    # keep one pixel of any component that would vanish entirely
    lab, n = ndimage.label(skel, structure=_EIGHT)
    if n == 0:
        return
    sizes = np.bincount(lab.ravel(), minlength=n + 1)
    killed = np.bincount(lab[dele], minlength=n + 1)
    doomed = np.nonzero((killed == sizes) & (sizes > 0))[0]
    for comp in doomed:
        if comp == 0:
            continue
        rr, cc = np.nonzero(lab == comp)
        dele[rr[0], cc[0]] = False


def _thin_subpass(skel, step):
    ring = _zs_ring(skel)
    stack = np.stack(ring).astype(np.uint8)
    B = stack.sum(axis=0)
    A = ((stack == 0) & (np.roll(stack, -1, axis=0) == 1)).sum(axis=0)
    P2, _, P4, _, P6, _, P8, _ = ring
    if step == 1:
        cond = ~(P2 & P4 & P6) & ~(P4 & P6 & P8)
    else:
        cond = ~(P2 & P4 & P8) & ~(P2 & P6 & P8)
    dele = skel & (B >= 2) & (B <= 6) & (A == 1) & cond
    if not dele.any():
        return False
    _spare_doomed(skel, dele)
    if not dele.any():
        return False
    skel &= ~dele
    return True


def _ring_values(skel, r, c):
    h, w = skel.shape
    out = []
    for dr, dc in ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)):
        rr, cc = r + dr, c + dc
        out.append(bool(skel[rr, cc]) if 0 <= rr < h and 0 <= cc < w else False)
    return out


def _is_simple(skel, r, c):
    # deletable without splitting the local foreground: exactly one 0->1
    # transition around the ring (Rutovitz crossing number == 1)
    ring = _ring_values(skel, r, c)
    trans = sum(1 for a, b in zip(ring, ring[1:] + ring[:1]) if not a and b)
    return trans == 1


def _dissolve_square_blocks(skel):
    # Zhang-Suen can leave 2x2 squares in staircase regions; peel them off
    # sequentially, deleting only simple non-endpoint pixels
    while True:
        blocks = skel[:-1, :-1] & skel[1:, :-1] & skel[:-1, 1:] & skel[1:, 1:]
        if not blocks.any():
            return
        member = np.zeros_like(skel)
        member[:-1, :-1] |= blocks
        member[1:, :-1] |= blocks
        member[:-1, 1:] |= blocks
        member[1:, 1:] |= blocks
        changed = False
        for r, c in zip(*np.nonzero(member)):
            if not skel[r, c]:
                continue
            if not _in_full_block(skel, r, c):
                continue
            if neighbor_count(skel, r, c) >= 2 and _is_simple(skel, r, c):
                skel[r, c] = False
                changed = True
        if not changed:
            return  # no simple pixel left; give up rather than disconnect


def _in_full_block(skel, r, c):
    h, w = skel.shape
    for r0 in (r - 1, r):
        for c0 in (c - 1, c):
            if 0 <= r0 and r0 + 1 < h and 0 <= c0 and c0 + 1 < w:
                if skel[r0, c0] and skel[r0 + 1, c0] and skel[r0, c0 + 1] and skel[r0 + 1, c0 + 1]:
                    return True
    return False


def thin_to_convergence(img):
    """Two-subiteration parallel thinning (Zhang-Suen conditions) iterated
    until a full pass deletes nothing, plus a square-block cleanup so that
    no 2x2 all-foreground block survives. Component count is preserved."""
    skel = np.array(img, dtype=bool)
    while True:
        c1 = _thin_subpass(skel, 1)
        c2 = _thin_subpass(skel, 2)
        if not (c1 or c2):
            break
    _dissolve_square_blocks(skel)
    return skel


def _fg_neighbors(img, r, c):
    h, w = img.shape
    out = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and img[rr, cc]:
                out.append((rr, cc))
    return out


def _walk_spur(img, r, c, max_spur):
    """Follow a branch from an endpoint until the path forks (the junction
    anchor); return the spur pixels if that happens within max_spur steps,
    None for dead ends (no junction) or longer branches."""
    path = [(r, c)]
    prev = None
    cur = (r, c)
    while len(path) <= max_spur:
        nbrs = [p for p in _fg_neighbors(img, *cur) if p != prev]
        if len(nbrs) == 0:
            return None  # isolated stroke, nothing to anchor the spur
        if len(nbrs) >= 2:
            return path  # cur attaches to the main structure
        prev, cur = cur, nbrs[0]
        path.append(cur)
    return None


def prune(img, max_spur=3):
    """Delete junction-anchored spurs of length <= max_spur, repeatedly.
    Branches with no junction anchor (isolated strokes) are kept."""
    out = np.array(img, dtype=bool)
    if max_spur <= 0:
        return out
    changed = True
    while changed:
        changed = False
        counts = neighbor_count_grid(out)
        for r, c in np.argwhere(out & (counts == 1)):
            if not out[r, c]:
                continue
            spur = _walk_spur(out, int(r), int(c), max_spur)
            if spur is not None:
                for rr, cc in spur:
                    out[rr, cc] = False
                changed = True
    return out


# ---------------------------------------------------------------------------
# Normalization


def _axis_scale(img, axis, target):
    src = img.shape[axis]
    if src == target:
        return img
    idx = np.arange(src)
    if src < target:
        # growing: each source pixel paints its whole destination block
        reps = ((idx + 1) * target) // src - (idx * target) // src
        return np.repeat(img, reps, axis=axis)
    # shrinking: max-pool source groups so thin strokes never disappear
    dest = (idx * target) // src
    starts = np.searchsorted(dest, np.arange(target))
    return np.maximum.reduceat(img.astype(np.uint8), starts, axis=axis).astype(bool)


def normalize(img, size=NORM_SIZE):
    """Crop to the bounding box, scale to size x size (forward block mapping,
    the nearest-neighbor inverse map), then re-thin to one-pixel width.

    Thinning erodes blunt stroke ends, which at large upscales can pull the
    skeleton more than a pixel off the frame edges; a couple of crop/rescale
    passes stretch it back so the result fills the frame again."""
    box = bounding_box(img)  # raises EmptyImageError on blank input
    glyph = crop(img, box)
    for _ in range(3):
        scaled = _axis_scale(_axis_scale(glyph, 0, size), 1, size)
        skel = thin_to_convergence(scaled)
        box = bounding_box(skel)
        if (
            box.row_min <= 1
            and box.col_min <= 1
            and box.row_max >= size - 2
            and box.col_max >= size - 2
        ):
            break
        glyph = crop(skel, box)
    return skel


def is_one_pixel_wide(img):
    """True when no 2x2 block is entirely foreground."""
    if img.shape[0] < 2 or img.shape[1] < 2:
        return True
    return not (img[:-1, :-1] & img[1:, :-1] & img[:-1, 1:] & img[1:, 1:]).any()
