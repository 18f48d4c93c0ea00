"""Vectorized footprint geometry and contact detection between sampled
trajectories."""

from __future__ import annotations

import numpy as np
import shapely

from .settings import Settings


def footprint_corners(pos: np.ndarray, yaw: np.ndarray, length: float, width: float) -> np.ndarray:
    """Oriented-rectangle corners, shape (n, 4, 2), counter-clockwise."""
    pos = np.atleast_2d(pos)
    yaw = np.broadcast_to(np.asarray(yaw, dtype=float), (len(pos),))
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    c, s = np.cos(yaw)[:, None], np.sin(yaw)[:, None]
    out = np.empty((len(pos), 4, 2))
    out[..., 0] = pos[:, 0:1] + c * local[:, 0] - s * local[:, 1]
    out[..., 1] = pos[:, 1:2] + s * local[:, 0] + c * local[:, 1]
    return out


def _point_segment_dist(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # pts (n,k,2); segments a,b (n,m,2) -> (n,k,m)
    ab = b - a
    ap = pts[:, :, None, :] - a[:, None, :, :]
    denom = np.einsum("nmi,nmi->nm", ab, ab)[:, None, :]
    u = np.clip(np.einsum("nkmi,nmi->nkm", ap, ab) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    proj = a[:, None, :, :] + u[..., None] * ab[:, None, :, :]
    return np.linalg.norm(pts[:, :, None, :] - proj, axis=-1)


def rect_clearance(c1: np.ndarray, c2: np.ndarray, exact: bool = True) -> np.ndarray:
    """Signed clearance between convex quadrilaterals per row: separation
    distance when apart, minus the penetration depth when overlapping.
    With ``exact=False`` separated rows get the largest separating-axis gap
    instead, a cheaper lower bound on the distance with the same sign."""
    e1 = np.roll(c1, -1, axis=1) - c1
    e2 = np.roll(c2, -1, axis=1) - c2
    edges = np.concatenate([e1[:, :2], e2[:, :2]], axis=1)
    axes = np.stack([-edges[..., 1], edges[..., 0]], -1)
    axes /= np.linalg.norm(axes, axis=-1, keepdims=True)
    pr1 = axes @ c1.swapaxes(1, 2)  # (n, axis, corner)
    pr2 = axes @ c2.swapaxes(1, 2)
    overlap = np.minimum(pr1.max(-1), pr2.max(-1)) - np.maximum(pr1.min(-1), pr2.min(-1))
    pen = overlap.min(-1)
    out = -pen
    sep = pen < 0
    if exact and np.any(sep):
        a1, b1 = c1[sep], np.roll(c1[sep], -1, axis=1)
        a2, b2 = c2[sep], np.roll(c2[sep], -1, axis=1)
        d = np.minimum(
            _point_segment_dist(c1[sep], a2, b2).min(axis=(1, 2)),
            _point_segment_dist(c2[sep], a1, b1).min(axis=(1, 2)),
        )
        out[sep] = d
    return out


def segment_closest_approach(rel0: np.ndarray, rel1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For relative positions moving linearly from ``rel0`` to ``rel1`` per
    row, return (min distance, fraction in [0, 1] where it occurs; earliest on
    ties)."""
    d = rel1 - rel0
    dd = np.einsum("ni,ni->n", d, d)
    u = np.where(dd > 0, -np.einsum("ni,ni->n", rel0, d) / np.where(dd > 0, dd, 1.0), 0.0)
    u = np.clip(u, 0.0, 1.0)
    return np.linalg.norm(rel0 + u[:, None] * d, axis=-1), u


def pair_clearance(tr1, tr2, settings: Settings, exact: bool = True) -> np.ndarray:
    """Clearance at each common sample; point mode gives center distance.
    ``exact=False`` allows a lower bound for separated footprints (see
    :func:`rect_clearance`)."""
    if settings.distance_mode == "center":
        return np.linalg.norm(tr1.pos - tr2.pos, axis=-1)
    c1 = footprint_corners(tr1.pos, tr1.yaw, tr1.length, tr1.width)
    c2 = footprint_corners(tr2.pos, tr2.yaw, tr2.length, tr2.width)
    return rect_clearance(c1, c2, exact)


def is_contact(clearance, settings: Settings):
    """Points touch at zero distance; footprints collide only when their
    interiors overlap (touching at zero clearance is not a collision)."""
    if settings.distance_mode == "center":
        return np.asarray(clearance) <= settings.contact_tol
    return np.asarray(clearance) < -settings.contact_tol


def first_contact(tr1, tr2, settings: Settings) -> float:
    """Earliest relative time (trajectory clock) at which the two sampled
    trajectories are in contact, ``inf`` if never."""
    from .trajectory import interp_pair

    t = tr1.t
    if settings.distance_mode == "center":
        rel = tr1.pos - tr2.pos
        if np.linalg.norm(rel[0]) <= settings.contact_tol:
            return float(t[0])
        dmin, u = segment_closest_approach(rel[:-1], rel[1:])
        hit = np.nonzero(dmin <= settings.contact_tol)[0]
        if len(hit) == 0:
            return float("inf")
        k = hit[0]
        # earliest root of |rel0 + u d| = tol on the segment
        r0, d = rel[k], rel[k + 1] - rel[k]
        a = d @ d
        b = 2 * (r0 @ d)
        c = r0 @ r0 - settings.contact_tol**2
        if a <= 0:
            return float(t[k])
        disc = max(b * b - 4 * a * c, 0.0)
        uu = min(max((-b - np.sqrt(disc)) / (2 * a), 0.0), 1.0)
        return float(t[k] + uu * (t[k + 1] - t[k]))

    # the search only needs the contact sign and a clearance lower bound
    c = pair_clearance(tr1, tr2, settings, exact=False)
    if is_contact(c[0], settings):
        return float(t[0])
    r1 = 0.5 * np.hypot(tr1.length, tr1.width)
    r2 = 0.5 * np.hypot(tr2.length, tr2.width)

    def at(x):
        s1, s2 = interp_pair(tr1, tr2, np.array([x]))
        return s1, s2, float(pair_clearance(s1, s2, settings, exact=False)[0])

    def bound(a, b):
        # clearance is Lipschitz in the interpolated motion: it changes by
        # at most the relative translation plus the corner arcs swept
        s1a, s2a = a[0], a[1]
        s1b, s2b = b[0], b[1]
        rel = np.linalg.norm((s1b.pos[0] - s2b.pos[0]) - (s1a.pos[0] - s2a.pos[0]))
        return rel + r1 * abs(s1b.yaw[0] - s1a.yaw[0]) + r2 * abs(s2b.yaw[0] - s2a.yaw[0])

    rel = tr1.pos - tr2.pos
    yaw1, yaw2 = np.unwrap(tr1.yaw), np.unwrap(tr2.yaw)
    D = (
        np.linalg.norm(np.diff(rel, axis=0), axis=1)
        + r1 * np.abs(np.diff(yaw1))
        + r2 * np.abs(np.diff(yaw2))
    )
    return _first_event(t, c, D, at, bound, lambda x: is_contact(x, settings), -settings.contact_tol, settings)


def _first_event(t, c, D, at, bound, hit, level, settings: Settings) -> float:
    """Earliest time where ``hit(clearance)`` holds on piecewise
    interpolated motion. ``D[k]`` bounds the clearance change on segment k;
    a segment cannot reach ``level`` when ``c[k] + c[k+1] - D[k] > 2 level``.
    Suspicious segments are split recursively down to ``time_tol``."""
    hits = np.nonzero(np.asarray(hit(c), dtype=bool))[0]
    k_hit = hits[0] if len(hits) else len(c)
    sus = np.nonzero(c[:-1] + c[1:] - D <= 2 * level + 1e-12)[0]
    for k in sus:
        if k + 1 >= k_hit:
            break
        res = _search(t[k], t[k + 1], at(t[k]), at(t[k + 1]), at, bound, hit, level, settings)
        if res is not None:
            return res
    if k_hit == len(c):
        return float("inf")
    if k_hit == 0:
        return float(t[0])
    res = _search(t[k_hit - 1], t[k_hit], at(t[k_hit - 1]), at(t[k_hit]), at, bound, hit, level, settings)
    return float(t[k_hit]) if res is None else res


def _search(lo, hi, a, b, at, bound, hit, level, settings):
    """Earliest hit in (lo, hi]; ``a``/``b`` are ``at`` results at the ends."""
    if hit(b[-1]):
        # onset lies in (lo, hi]; look for an earlier separate hit first
        if hi - lo <= settings.time_tol:
            return float(hi)
        mid = 0.5 * (lo + hi)
        m = at(mid)
        if hit(m[-1]):
            return _search(lo, mid, a, m, at, bound, hit, level, settings)
        r = _search(lo, mid, a, m, at, bound, hit, level, settings)
        return r if r is not None else _search(mid, hi, m, b, at, bound, hit, level, settings)
    if a[-1] + b[-1] - bound(a, b) > 2 * level + 1e-12 or hi - lo <= settings.time_tol:
        return None
    mid = 0.5 * (lo + hi)
    m = at(mid)
    r = _search(lo, mid, a, m, at, bound, hit, level, settings)
    return r if r is not None else _search(mid, hi, m, b, at, bound, hit, level, settings)


def polygon_clearance(tr, polygon, settings: Settings) -> np.ndarray:
    """Distance from each trajectory sample to a static polygon (0 when
    touching or inside)."""
    poly = polygon if isinstance(polygon, shapely.Geometry) else shapely.Polygon(polygon)
    if settings.distance_mode == "center":
        geoms = shapely.points(tr.pos)
    else:
        geoms = shapely.polygons(footprint_corners(tr.pos, tr.yaw, tr.length, tr.width))
    return shapely.distance(geoms, poly)


def polygon_overlap(tr, polygon, settings: Settings) -> np.ndarray:
    """Whether each sample touches or occupies the polygon."""
    return polygon_clearance(tr, polygon, settings) <= settings.contact_tol


def first_polygon_reach(tr, polygon, settings: Settings) -> float:
    """Earliest time the trajectory touches or enters a static polygon."""
    from .trajectory import interp

    poly = polygon if isinstance(polygon, shapely.Geometry) else shapely.Polygon(polygon)
    c = polygon_clearance(tr, poly, settings)
    if len(c) == 1 or c[0] <= settings.contact_tol:
        return float(tr.t[0]) if c[0] <= settings.contact_tol else float("inf")
    r = 0.0 if settings.distance_mode == "center" else 0.5 * np.hypot(tr.length, tr.width)

    def at(x):
        s = interp(tr, np.array([x]))
        return s, float(polygon_clearance(s, poly, settings)[0])

    def bound(a, b):
        return np.linalg.norm(b[0].pos[0] - a[0].pos[0]) + r * abs(b[0].yaw[0] - a[0].yaw[0])

    yaw = np.unwrap(tr.yaw)
    D = np.linalg.norm(np.diff(tr.pos, axis=0), axis=1) + r * np.abs(np.diff(yaw))
    return _first_event(tr.t, c, D, at, bound, lambda x: x <= settings.contact_tol, settings.contact_tol, settings)


def _pieces(tr, tol):
    """Split a sampled path into moving segments and merged stationary
    stretches: rows of (ax, ay, bx, by, t_a, t_b, moving)."""
    pos, t = tr.pos, tr.t
    rows = []
    i, n = 0, len(t)
    if n == 1:
        return np.array([[*pos[0], *pos[0], t[0], t[0], 0.0]])
    while i < n - 1:
        if np.linalg.norm(pos[i + 1] - pos[i]) <= tol:
            j = i + 1
            while j < n - 1 and np.linalg.norm(pos[j + 1] - pos[i]) <= tol:
                j += 1
            rows.append([*pos[i], *pos[i], t[i], t[j], 0.0])
            i = j
        else:
            rows.append([*pos[i], *pos[i + 1], t[i], t[i + 1], 1.0])
            i += 1
    return np.array(rows)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _interval_pairs(i1, i2):
    """Closest pair of times drawn from two intervals."""
    (l1, h1), (l2, h2) = i1, i2
    if h1 < l2:
        return h1, l2
    if h2 < l1:
        return l1, h2
    t = max(l1, l2)
    return t, t


def path_coincidences(tr1, tr2, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Time pairs (t1, t2) with tr1.pos(t1) == tr2.pos(t2) on the piecewise
    linear paths. Collinear overlaps contribute their end points and, when
    present, the point where both actors arrive simultaneously, which is
    enough to minimise any objective monotone in |t1 - t2|."""
    P, Q = _pieces(tr1, tol), _pieces(tr2, tol)
    out: list[tuple[float, float]] = []
    lo1 = np.minimum(P[:, 0:2], P[:, 2:4]) - tol
    hi1 = np.maximum(P[:, 0:2], P[:, 2:4]) + tol
    lo2 = np.minimum(Q[:, 0:2], Q[:, 2:4]) - tol
    hi2 = np.maximum(Q[:, 0:2], Q[:, 2:4]) + tol
    chunk = 512
    for s in range(0, len(P), chunk):
        sl = slice(s, s + chunk)
        ov = np.all(
            (lo1[sl, None, :] <= hi2[None, :, :]) & (lo2[None, :, :] <= hi1[sl, None, :]), axis=-1
        )
        for i, j in zip(*np.nonzero(ov)):
            out.extend(_piece_pair(P[s + i], Q[j], tol))
    return out


def _piece_pair(p, q, tol):
    a, da = p[:2], p[2:4] - p[:2]
    b, db = q[:2], q[2:4] - q[:2]
    pm, qm = bool(p[6]), bool(q[6])
    if not pm and not qm:
        if np.linalg.norm(a - b) <= tol:
            return [_interval_pairs((p[4], p[5]), (q[4], q[5]))]
        return []
    if not pm or not qm:
        stat, mov, swap = (p, q, False) if not pm else (q, p, True)
        x = stat[:2]
        m_a, m_d = mov[:2], mov[2:4] - mov[:2]
        u = float(np.clip((x - m_a) @ m_d / (m_d @ m_d), 0.0, 1.0))
        if np.linalg.norm(m_a + u * m_d - x) > tol:
            return []
        tm = mov[4] + u * (mov[5] - mov[4])
        ts, tm = _interval_pairs((stat[4], stat[5]), (tm, tm))
        return [(tm, ts)] if swap else [(ts, tm)]
    denom = _cross(da, db)
    scale = np.linalg.norm(da) * np.linalg.norm(db)
    ba = b - a
    if abs(denom) > 1e-12 * scale:
        s = _cross(ba, db) / denom
        u = _cross(ba, da) / denom
        e = tol / np.linalg.norm(da), tol / np.linalg.norm(db)
        if -e[0] <= s <= 1 + e[0] and -e[1] <= u <= 1 + e[1]:
            s, u = min(max(s, 0.0), 1.0), min(max(u, 0.0), 1.0)
            return [(p[4] + s * (p[5] - p[4]), q[4] + u * (q[5] - q[4]))]
        return []
    # parallel: coincident only if collinear
    if abs(_cross(ba, da)) / np.linalg.norm(da) > tol:
        return []
    e = da / np.linalg.norm(da)
    xa = np.array([0.0, da @ e])
    xb = np.array([ba @ e, ba @ e + db @ e])
    lo, hi = max(xa.min(), xb.min()), min(xa.max(), xb.max())
    if lo > hi + tol:
        return []

    def times_at(x):
        s = (x - xa[0]) / (xa[1] - xa[0])
        u = (x - xb[0]) / (xb[1] - xb[0])
        return p[4] + s * (p[5] - p[4]), q[4] + u * (q[5] - q[4])

    cands = [times_at(lo), times_at(hi)]
    (t1l, t2l), (t1h, t2h) = cands
    fl, fh = t1l - t2l, t1h - t2h
    if fl * fh < 0:
        x = lo + (hi - lo) * fl / (fl - fh)
        cands.append(times_at(x))
    return cands
