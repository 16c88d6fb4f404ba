"""Convex hulls, tessellations, barycentric coordinates, and hull simplification.

Built on Qhull via scipy.spatial.  Hull meshes are canonicalized (vertices in
lexicographic order, coplanar facets re-triangulated deterministically) so that
geometrically identical inputs produce identical meshes regardless of the
point ordering Qhull saw.  All structures are immutable after construction and
safe to query concurrently.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

JITTER_SCALE = 1e-7
_JITTER_SEED = 74755


class DegenerateInput(Exception):
    """Point set is affinely dependent (or Qhull failed on near-degeneracy)."""


class OutsideHull(Exception):
    """Query point lies outside the tessellated hull."""


class NoFeasibleCollapse(Exception):
    """No edge of the hull admits a volume-adding collapse point."""


def deterministic_jitter(points, scale=JITTER_SCALE):
    """Fixed-seed uniform jitter in +-scale, a function of index and shape only."""
    rng = np.random.default_rng(_JITTER_SEED)
    return points + rng.uniform(-scale, scale, size=points.shape)


@dataclass(frozen=True)
class HullMesh:
    """Convex hull as canonical vertices plus triangulated outward facets.

    equations[k] = (normal, offset) with normal . x + offset <= 0 for interior
    points; facets[k] indexes rows of vertices.
    """

    dim: int
    vertices: np.ndarray
    facets: np.ndarray
    equations: np.ndarray
    volume: float

    def __len__(self):
        return len(self.vertices)

    def signed_distances(self, points):
        """Max facet-plane signed distance per point (<= 0 means inside)."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        d = points @ self.equations[:, :-1].T + self.equations[:, -1]
        return d.max(axis=1)

    def contains(self, points, tol=1e-9):
        return self.signed_distances(points) <= tol

    def edges(self):
        """Unique undirected facet edges as sorted (i, j) pairs, ordered."""
        f = self.facets
        pairs = np.concatenate(
            [f[:, [a, b]] for a, b in combinations(range(f.shape[1]), 2)]
        )
        pairs = np.sort(pairs, axis=1)
        return np.unique(pairs, axis=0)

    def facet_areas(self):
        v = self.vertices[self.facets]
        if self.dim == 3:
            return 0.5 * np.linalg.norm(
                np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1
            )
        # general (dim-1)-simplex measure via Gram determinant
        e = v[:, 1:] - v[:, :1]
        g = np.einsum("fik,fjk->fij", e, e)
        k = self.dim - 1
        import math

        return np.sqrt(np.maximum(np.linalg.det(g), 0.0)) / math.factorial(k)


def _canonical_vertex_order(coords):
    return np.lexsort(coords.T[::-1])


def _merge_coplanar_triangles(simplices, equations, neighbors):
    """Union-find grouping of neighboring facet triangles with equal planes."""
    nf = len(simplices)
    parent = np.arange(nf)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for f in range(nf):
        for g in neighbors[f]:
            if g < 0 or g <= f:
                continue
            if (
                np.dot(equations[f, :-1], equations[g, :-1]) > 1.0 - 1e-10
                and abs(equations[f, -1] - equations[g, -1]) < 1e-10
            ):
                parent[find(g)] = find(f)
    groups = {}
    for f in range(nf):
        groups.setdefault(find(f), []).append(f)
    return list(groups.values())


def _fan_triangulate_polygon(vertex_ids, coords, normal):
    """Deterministic fan triangulation of a convex planar polygon.

    Orders the polygon CCW around its centroid (seen from outside along the
    normal), starts the cycle at the smallest vertex id, and fans from it.
    """
    pts = coords[vertex_ids]
    centroid = pts.mean(axis=0)
    # in-plane orthonormal basis
    a = np.eye(3)[np.argmin(np.abs(normal))]
    u = a - np.dot(a, normal) * normal
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    rel = pts - centroid
    ang = np.arctan2(rel @ v, rel @ u)
    order = np.argsort(ang, kind="stable")
    cyc = [vertex_ids[k] for k in order]
    start = int(np.argmin(cyc))
    cyc = cyc[start:] + cyc[:start]
    return [(cyc[0], cyc[i], cyc[i + 1]) for i in range(1, len(cyc) - 1)]


def _canonicalize(qhull, points):
    dim = points.shape[1]
    old_ids = qhull.vertices
    coords = points[old_ids]
    order = _canonical_vertex_order(coords)
    coords = coords[order]
    remap = np.full(points.shape[0], -1, dtype=np.int64)
    remap[old_ids[order]] = np.arange(len(old_ids))

    simplices = remap[qhull.simplices]
    equations = qhull.equations.copy()

    if dim == 3:
        groups = _merge_coplanar_triangles(simplices, equations, qhull.neighbors)
        facets, eqs = [], []
        for grp in groups:
            eq = equations[grp[0]]
            if len(grp) == 1:
                tri = [tuple(simplices[grp[0]])]
            else:
                ids = np.unique(simplices[grp])
                tri = _fan_triangulate_polygon(list(ids), coords, eq[:-1])
            for t in tri:
                facets.append(t)
                eqs.append(eq)
        facets = np.asarray(facets, dtype=np.int32)
        equations = np.asarray(eqs)
    else:
        facets = simplices.astype(np.int32)

    # canonical facet order: sorted index tuples, lexicographic
    keyed = np.sort(facets, axis=1)
    forder = np.lexsort(keyed.T[::-1])
    return HullMesh(
        dim=dim,
        vertices=coords,
        facets=facets[forder],
        equations=equations[forder],
        volume=float(qhull.volume),
    )


def convex_hull(cloud):
    """Convex hull of an (N, dim) point cloud as a canonical HullMesh.

    Raises DegenerateInput when the points are affinely dependent or Qhull
    fails on near-degenerate structure; callers retry with
    deterministic_jitter applied.
    """
    points = np.ascontiguousarray(np.asarray(cloud, dtype=np.float64))
    dim = points.shape[1]
    if points.shape[0] < dim + 1:
        raise DegenerateInput(f"need at least {dim + 1} points, got {points.shape[0]}")
    try:
        qhull = ConvexHull(points)
    except QhullError as exc:
        raise DegenerateInput(str(exc).splitlines()[0]) from exc
    return _canonicalize(qhull, points)


def convex_hull_robust(cloud):
    """convex_hull with the documented jitter fallback.

    Returns (hull, points_used, jittered) so callers that need barycentric
    consistency can keep working with the jittered coordinates.
    """
    points = np.asarray(cloud, dtype=np.float64)
    try:
        return convex_hull(points), points, False
    except DegenerateInput:
        pass
    last = None
    for scale in (JITTER_SCALE, 10 * JITTER_SCALE):
        jittered = deterministic_jitter(points, scale)
        try:
            return convex_hull(jittered), jittered, True
        except DegenerateInput as exc:
            last = exc
    raise last


class SimplicialTessellation:
    """Simplices covering a convex hull, with point location and barycentrics.

    Two construction paths: Delaunay (keeps the Qhull walk structure for fast
    location over many simplices) and explicit simplex lists (star
    tessellations; located by evaluating barycentric coordinates against every
    simplex, a batched matrix multiply plus sign check).
    """

    def __init__(self, vertices, simplices, qhull_delaunay=None):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.simplices = np.asarray(simplices, dtype=np.int32)
        self.dim = self.vertices.shape[1]
        self._delaunay = qhull_delaunay
        self._origins = None
        self._inv = None

    def _ensure_transforms(self):
        if self._inv is not None:
            return
        v = self.vertices[self.simplices]
        self._origins = v[:, 0, :]
        mats = np.swapaxes(v[:, 1:, :] - v[:, :1, :], 1, 2)
        dets = np.linalg.det(mats)
        bad = ~(np.abs(dets) > 1e-300)  # exactly degenerate slivers
        if bad.any():
            mats = mats.copy()
            mats[bad] = np.eye(self.dim)
        inv = np.linalg.inv(mats)
        if bad.any():
            inv[bad] = np.nan  # NaN barycentrics route points to the polish path
        self._inv = inv

    def simplex_volumes(self):
        v = self.vertices[self.simplices]
        mats = v[:, 1:, :] - v[:, :1, :]
        import math

        return np.abs(np.linalg.det(mats)) / math.factorial(self.dim)

    def total_volume(self):
        return float(self.simplex_volumes().sum())

    def barycentric_in(self, simplex_ids, points):
        """Barycentric coordinates of points in the given simplices."""
        self._ensure_transforms()
        rel = points - self._origins[simplex_ids]
        rest = np.einsum("nij,nj->ni", self._inv[simplex_ids], rel)
        return np.concatenate([1.0 - rest.sum(axis=1, keepdims=True), rest], axis=1)

    def _locate_all_simplices(self, points):
        """Best simplex per point by max-min barycentric over all simplices."""
        self._ensure_transforms()
        rel = points[:, None, :] - self._origins[None, :, :]
        rest = np.einsum("sij,nsj->nsi", self._inv, rel)
        bary = np.concatenate([1.0 - rest.sum(axis=2, keepdims=True), rest], axis=2)
        worst = np.nan_to_num(bary, nan=-np.inf).min(axis=2)
        best = worst.argmax(axis=1)
        return best, bary[np.arange(len(points)), best], worst.max(axis=1)

    def _core_locate(self, points, tol):
        """Shared location pass: (valid simplex id, barycentrics, true worst).

        bary rows whose true worst coordinate is below -tol hold the convex
        projection onto the best simplex instead of raw barycentrics.
        """
        if self._delaunay is not None:
            sid = self._delaunay.find_simplex(points).astype(np.int64)
            missed = sid < 0
            if missed.any():
                sid[missed] = self._delaunay.find_simplex(points[missed], tol=1e-7)
            found = sid >= 0
            bary = np.zeros((len(points), self.dim + 1))
            if found.any():
                bary[found] = self.barycentric_in(sid[found], points[found])
            worst = np.where(found, np.nan_to_num(bary, nan=-np.inf).min(axis=1), -np.inf)
            for i in np.flatnonzero(worst < -tol):
                sid[i], bary[i], worst[i] = self._polish_point(points[i], sid[i])
            return sid, bary, worst
        sid, bary, worst = self._locate_all_simplices(points)
        for i in np.flatnonzero(worst < -tol):
            bary[i] = _project_to_simplex(self.vertices[self.simplices[sid[i]]], points[i])
        return sid, bary, worst

    def locate_batch(self, points, tol=1e-9):
        """Locate points; returns (simplex index, (n, dim+1) barycentrics).

        Points outside every simplex beyond tol get simplex index -1 and the
        convex weights of their projection onto the least-bad simplex.
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        sid, bary, worst = self._core_locate(points, tol)
        return np.where(worst < -tol, -1, sid), bary

    def weights_batch(self, points, tol=1e-9):
        """Simplex ids and convex-ready barycentrics for every point.

        Unlike locate_batch this never reports -1: points outside the hull
        beyond tolerance keep the weights of their projection onto the best
        simplex, so raw coordinates stay >= -tol by construction.
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        sid, bary, _ = self._core_locate(points, tol)
        return sid, bary

    def _polish_point(self, point, hint):
        """Re-locate a point whose walk location gave bad barycentrics.

        Tries the hint simplex and its neighbors, then an exhaustive pass;
        falls back to the convex projection onto the best simplex so the
        returned weights stay nonnegative.  Returns (simplex, weights,
        true_min) where true_min is the pre-projection worst coordinate, the
        caller's inside/outside signal.
        """
        cands = []
        if hint >= 0:
            cands.append(int(hint))
            cands.extend(int(k) for k in self._delaunay.neighbors[hint] if k >= 0)
        best_sid, best_bary, best_min = -1, None, -np.inf
        for sid in cands:
            b = self.barycentric_in(np.array([sid]), point[None])[0]
            m = np.nan_to_num(b, nan=-np.inf).min()
            if m > best_min:
                best_sid, best_bary, best_min = sid, b, m
        if best_min < -1e-9:
            sid2, bary2, worst2 = self._locate_all_simplices(point[None])
            if worst2[0] > best_min:
                best_sid, best_bary, best_min = int(sid2[0]), bary2[0], worst2[0]
        if best_min < -1e-9 or np.isnan(best_bary).any():
            verts = self.vertices[self.simplices[best_sid]]
            w = _project_to_simplex(verts, point)
            return best_sid, w, best_min
        return best_sid, best_bary, best_min

    def locate_and_barycentric(self, q, tol=1e-9):
        """Sparse convex weights over tessellation vertices for one point.

        Returns (vertex_indices, weights); raises OutsideHull when q is not in
        any simplex within tol.
        """
        sid, bary = self.locate_batch(np.asarray(q, dtype=np.float64)[None], tol=tol)
        if sid[0] < 0:
            raise OutsideHull("point is outside the tessellated hull")
        w = np.clip(bary[0], 0.0, None)
        w /= w.sum()
        return self.simplices[sid[0]].copy(), w

def delaunay_tessellate(cloud):
    """Delaunay tessellation of a point cloud (canonical point order).

    Raises DegenerateInput for affinely dependent input, like convex_hull.
    """
    points = np.ascontiguousarray(np.asarray(cloud, dtype=np.float64))
    dim = points.shape[1]
    if points.shape[0] < dim + 1:
        raise DegenerateInput(f"need at least {dim + 1} points, got {points.shape[0]}")
    order = _canonical_vertex_order(points)
    pts = points[order]
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise DegenerateInput(str(exc).splitlines()[0]) from exc
    return SimplicialTessellation(pts, tri.simplices, qhull_delaunay=tri)


def star_tessellate(hull, star):
    """One simplex per facet not incident to the star vertex.

    Valid for any convex polytope with triangulated facets; guarantees the
    star vertex shares an edge with every other hull vertex.
    """
    star = int(star)
    keep = ~np.any(hull.facets == star, axis=1)
    simplices = np.concatenate(
        [
            hull.facets[keep],
            np.full((int(keep.sum()), 1), star, dtype=hull.facets.dtype),
        ],
        axis=1,
    )
    return SimplicialTessellation(hull.vertices, simplices)


def _project_to_simplex(verts, q):
    """Barycentric weights of the closest point to q inside a simplex.

    Face-subset enumeration; exact for the small simplices used here.
    """
    k = verts.shape[0]
    best_d, best_w = np.inf, None
    for r in range(1, k + 1):
        for subset in combinations(range(k), r):
            vs = verts[list(subset)]
            if r == 1:
                lam = np.array([1.0])
            else:
                e = vs[1:] - vs[0]
                g = e @ e.T
                try:
                    t = np.linalg.solve(g, e @ (q - vs[0]))
                except np.linalg.LinAlgError:
                    continue
                lam = np.concatenate([[1.0 - t.sum()], t])
                if (lam < -1e-12).any():
                    continue
            p = lam @ vs
            d = np.linalg.norm(q - p)
            if d < best_d - 1e-15:
                best_d = d
                best_w = np.zeros(k)
                best_w[list(subset)] = np.clip(lam, 0.0, None)
    best_w /= best_w.sum()
    return best_w


def _closest_on_triangles(tri_pts, q):
    """Closest points on a batch of 3D triangles to a batch of queries.

    tri_pts: (F, 3, 3); q: (n, 3).  Returns (dist (n, F), closest (n, F, 3)).
    """
    a, b, c = tri_pts[:, 0], tri_pts[:, 1], tri_pts[:, 2]
    ab, ac = b - a, c - a
    qa = q[:, None, :] - a[None]
    d1 = np.einsum("fk,nfk->nf", ab, qa)
    d2 = np.einsum("fk,nfk->nf", ac, qa)
    a11 = np.einsum("fk,fk->f", ab, ab)
    a12 = np.einsum("fk,fk->f", ab, ac)
    a22 = np.einsum("fk,fk->f", ac, ac)
    det = a11 * a22 - a12 * a12
    det = np.where(np.abs(det) < 1e-300, 1.0, det)
    v = (a22 * d1 - a12 * d2) / det
    w = (a11 * d2 - a12 * d1) / det
    inside = (v >= 0) & (w >= 0) & (v + w <= 1)

    def edge_pt(p0, e, d_num, d_den):
        t = np.clip(d_num / np.where(d_den < 1e-300, 1.0, d_den), 0.0, 1.0)
        return p0[None] + t[..., None] * e[None]

    cand = np.empty((4,) + (q.shape[0], tri_pts.shape[0], 3))
    cand[0] = a[None] + v[..., None] * ab[None] + w[..., None] * ac[None]
    cand[1] = edge_pt(a, ab, d1, a11)
    cand[2] = edge_pt(a, ac, d2, a22)
    bc = c - b
    qb = q[:, None, :] - b[None]
    d3 = np.einsum("fk,nfk->nf", bc, qb)
    cand[3] = edge_pt(b, bc, d3, np.einsum("fk,fk->f", bc, bc))
    dists = np.linalg.norm(q[None, :, None, :] - cand, axis=3)
    dists[0][~inside] = np.inf
    pick = dists.argmin(axis=0)
    n_idx, f_idx = np.meshgrid(
        np.arange(q.shape[0]), np.arange(tri_pts.shape[0]), indexing="ij"
    )
    closest = cand[pick, n_idx, f_idx]
    return dists.min(axis=0), closest


def distance_to_hull(hull, points):
    """Euclidean distance to a hull and the closest boundary point.

    Interior points report distance 0 with themselves as the closest point.
    Returns (dist (n,), closest (n, dim)); scalar input gets 1-element arrays.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    dist = np.zeros(len(points))
    closest = points.copy()
    outside = ~hull.contains(points, tol=0.0)
    if not outside.any():
        return dist, closest
    qs = points[outside]
    tri_pts = hull.vertices[hull.facets]
    if hull.dim == 3:
        d, cp = _closest_on_triangles(tri_pts, qs)
        k = d.argmin(axis=1)
        dist[outside] = d[np.arange(len(qs)), k]
        closest[outside] = cp[np.arange(len(qs)), k]
    else:
        for i, q in zip(np.flatnonzero(outside), qs):
            best_d, best_p = np.inf, None
            for f in range(len(hull.facets)):
                w = _project_to_simplex(tri_pts[f], q)
                p = w @ tri_pts[f]
                d = np.linalg.norm(q - p)
                if d < best_d:
                    best_d, best_p = d, p
            dist[i] = best_d
            closest[i] = best_p
    return dist, closest


_COMBO_CACHE = {}


def _combos3(k):
    if k not in _COMBO_CACHE:
        _COMBO_CACHE[k] = np.asarray(list(combinations(range(k), 3)), dtype=np.int64)
    return _COMBO_CACHE[k]


def _lp_vertex_min(a, b, cost):
    """Minimize cost.x over vertices of {x : a @ x >= b}; None if no vertex."""
    idx = _combos3(len(a))
    mats = a[idx]
    good = np.abs(np.linalg.det(mats)) > 1e-12
    if not good.any():
        return None
    sols = np.linalg.solve(mats[good], b[idx[good]][..., None])[..., 0]
    feas = np.all(sols @ a.T >= b - 1e-9, axis=1)
    if not feas.any():
        return None
    vals = sols[feas] @ cost
    k = int(vals.argmin())
    return float(vals[k]), sols[feas][k]


def _collapse_candidate(planes, areas, bounds=(-40.0, 41.0)):
    """Least-added-volume point outside all incident facet planes.

    The added volume for a fixed set of incident faces is the linear cone
    objective sum_f A_f (n_f . x + o_f)/3, minimized subject to
    n_f . x + o_f >= 0 by enumerating constraint-triple vertices.  The
    objective cannot decrease along any feasible recession direction, so a
    feasible vertex of the plane system is optimal; box bounds are added only
    when the plane cone is not pointed or the apex runs implausibly far out.
    Returns (added_volume, point) or None when infeasible.
    """
    uniq, inv = np.unique(np.round(planes, 12), axis=0, return_inverse=True)
    agg = np.zeros(len(uniq))
    np.add.at(agg, inv, areas)
    n = uniq[:, :-1]
    off = uniq[:, -1]
    cost = (agg[:, None] * n).sum(axis=0) / 3.0
    const = float((agg * off).sum() / 3.0)

    res = _lp_vertex_min(n, -off, cost)
    if res is None or np.abs(res[1]).max() > bounds[1]:
        eye = np.eye(3)
        a_all = np.vstack([n, eye, -eye])
        b_all = np.concatenate([-off, np.full(3, bounds[0]), np.full(3, -bounds[1])])
        res = _lp_vertex_min(a_all, b_all, cost)
        if res is None:
            return None
    return res[0] + const, res[1]


def simplify_hull(hull, stop, max_steps=None):
    """Greedy constrained edge-collapse simplification of a 3D hull.

    Each step collapses the edge whose feasible collapse point adds the least
    volume (new point on or outside every plane of the facets incident to the
    edge's endpoints, so the hull only ever grows), then recomputes the hull.
    Returns the list of successive hulls, stopping before the first candidate
    for which stop(candidate) is true, at the simplex floor, or when no edge
    admits a feasible collapse.
    """
    if hull.dim != 3:
        raise ValueError("simplify_hull operates on 3D hulls")
    accepted = []
    current = hull
    cache = {}
    steps = 0
    while len(current.vertices) > 4:
        if max_steps is not None and steps >= max_steps:
            break
        edges = current.edges()
        incidence = [[] for _ in range(len(current.vertices))]
        for f, facet in enumerate(current.facets):
            for vid in facet:
                incidence[vid].append(f)
        areas = current.facet_areas()

        candidates = []
        for e_idx, (i, j) in enumerate(edges):
            fids = sorted(set(incidence[i]) | set(incidence[j]))
            planes = current.equations[fids]
            key = (np.round(planes, 12).tobytes(), np.round(areas[fids], 12).tobytes())
            if key in cache:
                res = cache[key]
            else:
                res = _collapse_candidate(planes, areas[fids])
                cache[key] = res
            if res is not None:
                candidates.append((res[0], e_idx, res[1]))
        if not candidates:
            break  # NoFeasibleCollapse: keep the current hull
        candidates.sort(key=lambda t: (t[0], t[1]))

        advanced = False
        for vol_added, e_idx, point in candidates:
            i, j = edges[e_idx]
            keep = np.ones(len(current.vertices), dtype=bool)
            keep[[i, j]] = False
            new_pts = np.vstack([current.vertices[keep], point])
            try:
                cand_hull = convex_hull(new_pts)
            except DegenerateInput:
                continue
            if cand_hull.volume < current.volume - 1e-9:
                continue
            if stop(cand_hull):
                return accepted
            current = cand_hull
            accepted.append(current)
            advanced = True
            steps += 1
            break
        if not advanced:
            break
    return accepted
