"""Exact so(1,4) structure: generators, brackets, Casimirs and the conformal-chart bridge.

Matrices hold ``fractions.Fraction`` entries.  A linear vector field
V_M = (M X)^D ∂_D composes as [V_M, V_N] = V_{NM − MN}, so brackets of the
vector fields are computed with that order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .charts import DIM, fd_partials
from .desitter import embed, embed_jacobian, killing_rotations, killing_translations

N5 = 5
ETA5_DIAG = (1, -1, -1, -1, -1)
LABELS = tuple((a, b) for a in range(N5) for b in range(a + 1, N5))


class AlgebraError(AssertionError):
    pass


def _zeros(n: int = N5) -> np.ndarray:
    return np.array([[0] * n for _ in range(n)], dtype=object)


def _eye(n: int = N5) -> np.ndarray:
    out = _zeros(n)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def eta(a: int, b: int) -> int:
    return ETA5_DIAG[a] if a == b else 0


def is_zero(m: np.ndarray) -> bool:
    return all(v == 0 for v in m.flat)


def exact_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return is_zero(a - b)


def max_abs(m: np.ndarray) -> Fraction:
    return max(abs(Fraction(v)) for v in m.flat)


def label_name(label: tuple[int, int]) -> str:
    return f"J_{label[0]}{label[1]}"


@dataclass(frozen=True)
class So14Generator:
    label: tuple[int, int]
    matrix: np.ndarray  # M[D, C]: J_AB = (M X)^D ∂_D

    @property
    def name(self) -> str:
        return label_name(self.label)

    def act(self, X) -> np.ndarray:
        return self.matrix.dot(np.array([Fraction(v) for v in X], dtype=object))

    def eta_antisymmetry_defect(self) -> np.ndarray:
        eta_m = np.diag([Fraction(v) for v in ETA5_DIAG]).astype(object)
        jm = eta_m.dot(self.matrix)
        return jm + jm.T


def generator_matrix(a: int, b: int) -> np.ndarray:
    """M^D_C = δ^D_B η_AC − δ^D_A η_BC, from J_AB = η_AC X^C ∂_B − η_BC X^C ∂_A."""
    m = _zeros()
    for d in range(N5):
        for c in range(N5):
            m[d, c] = int((d == b) * eta(a, c) - (d == a) * eta(b, c))
    return m


def field_components(a: int, b: int, X) -> np.ndarray:
    """The vector field J_AB at X, evaluated term by term (no matrices)."""
    out = np.array([Fraction(0)] * N5, dtype=object)
    for c in range(N5):
        out[b] += eta(a, c) * Fraction(X[c])
        out[a] -= eta(b, c) * Fraction(X[c])
    return out


def build_generators() -> dict[tuple[int, int], So14Generator]:
    return {lab: So14Generator(lab, generator_matrix(*lab)) for lab in LABELS}


def generator(gens: dict, a: int, b: int) -> np.ndarray:
    """J_ab for any ordered pair, with J_ba = −J_ab and J_aa = 0."""
    if a == b:
        return _zeros(next(iter(gens.values())).matrix.shape[0])
    if a < b:
        return gens[(a, b)].matrix
    return -gens[(b, a)].matrix


def bracket(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Vector-field bracket [V_M, V_N] = V_{NM − MN}."""
    return n.dot(m) - m.dot(n)


def decompose(m: np.ndarray) -> dict[tuple[int, int], Fraction]:
    """Coefficients c_AB with m = Σ c_AB J_AB (exact); raises if m is outside the span."""
    coeffs = {}
    for a, b in LABELS:
        c = Fraction(m[b, a]) / eta(a, a)
        if c != 0:
            coeffs[(a, b)] = c
    rebuilt = _zeros()
    gens = build_generators()
    for lab, c in coeffs.items():
        rebuilt = rebuilt + c * gens[lab].matrix
    if not exact_equal(rebuilt, m):
        raise AlgebraError("matrix is not in the span of the generators")
    return coeffs


def _combo(gens: dict, terms) -> np.ndarray:
    out = _zeros()
    for c, (a, b) in terms:
        if c:
            out = out + Fraction(c) * generator(gens, a, b)
    return out


def literal_bracket(gens: dict, p: tuple[int, int], q: tuple[int, int]) -> np.ndarray:
    """Expected [J_p, J_q] from the three listed rules (with antisymmetry for swapped kinds)."""
    (a, b), (l, t) = p, q
    if b == 4 and t == 4:
        return generator(gens, a, l)
    if b == 4 and t != 4:
        return -literal_bracket(gens, q, p)
    if t == 4:
        return _combo(gens, [(eta(l, b), (a, 4)), (-eta(l, a), (b, 4))])
    return _combo(gens, [(eta(a, l), (b, t)), (eta(b, t), (a, l)), (-eta(b, l), (a, t)), (-eta(a, t), (b, l))])


@dataclass(frozen=True)
class CommutatorReport:
    pair: tuple[tuple[int, int], tuple[int, int]]
    computed: np.ndarray
    expected: np.ndarray
    exact_match: bool

    @property
    def name(self) -> str:
        return f"[{label_name(self.pair[0])},{label_name(self.pair[1])}]"

    def computed_terms(self) -> dict[str, str]:
        return {label_name(k): str(v) for k, v in decompose(self.computed).items()}

    def expected_terms(self) -> dict[str, str]:
        return {label_name(k): str(v) for k, v in decompose(self.expected).items()}


def commutator_table(gens: dict | None = None) -> list[CommutatorReport]:
    gens = gens or build_generators()
    out = []
    for p, q in itertools.combinations(LABELS, 2):
        comp = bracket(gens[p].matrix, gens[q].matrix)
        exp = literal_bracket(gens, p, q)
        out.append(CommutatorReport((p, q), comp, exp, exact_equal(comp, exp)))
    return out


def scaled_generators(gens: dict, ell) -> dict[str, np.ndarray]:
    """Π_α = J_α4/ℓ and J_αβ, keyed by name."""
    ell = Fraction(ell)
    out = {f"Pi_{a}": gens[(a, 4)].matrix / ell for a in range(DIM)}
    for a, b in LABELS:
        if b < 4:
            out[label_name((a, b))] = gens[(a, b)].matrix
    return out


@dataclass(frozen=True)
class ScaledReport:
    name: str
    exact_match: bool


def scaled_commutator_table(gens: dict, ell) -> list[ScaledReport]:
    """[Π_α,Π_β] = J_αβ/ℓ², [J_αβ,Π_λ] = η_λβ Π_α − η_λα Π_β, and the Lorentz rule."""
    ell = Fraction(ell)
    s = scaled_generators(gens, ell)
    out = []
    for a, b in itertools.combinations(range(DIM), 2):
        got = bracket(s[f"Pi_{a}"], s[f"Pi_{b}"])
        out.append(ScaledReport(f"[Pi_{a},Pi_{b}]", exact_equal(got, generator(gens, a, b) / ell**2)))
    for a, b in itertools.combinations(range(DIM), 2):
        for l in range(DIM):
            got = bracket(generator(gens, a, b), s[f"Pi_{l}"])
            exp = eta(l, b) * s[f"Pi_{a}"] - eta(l, a) * s[f"Pi_{b}"]
            out.append(ScaledReport(f"[J_{a}{b},Pi_{l}]", exact_equal(got, exp)))
    return out


# ---------------------------------------------------------------- Jacobi

def jacobi_defects(rule) -> list[tuple]:
    """Triples violating Jacobi for a bracket ``rule(p, q) -> matrix`` read as structure constants."""
    gens = build_generators()
    consts = {}
    for p, q in itertools.permutations(LABELS, 2):
        consts[(p, q)] = decompose(rule(gens, p, q))
    bad = []
    for p, q, r in itertools.combinations(LABELS, 3):
        total: dict = {}
        for x, y, z in ((p, q, r), (q, r, p), (r, p, q)):
            for k1, c1 in consts[(y, z)].items():
                if k1 == x:
                    continue
                for k2, c2 in consts[(x, k1)].items():
                    total[k2] = total.get(k2, 0) + c1 * c2
        if any(v != 0 for v in total.values()):
            bad.append((p, q, r))
    return bad


def computed_rule(gens, p, q):
    return bracket(generator(gens, *p), generator(gens, *q))


# ---------------------------------------------------------------- Casimirs

def levi_civita5(idx) -> int:
    """ε with ε_{01234} = +1."""
    idx = list(idx)
    if len(set(idx)) < N5:
        return 0
    sign = 1
    for i in range(N5):
        for j in range(i + 1, N5):
            if idx[i] > idx[j]:
                sign = -sign
    return sign


def _size(gens: dict) -> int:
    return next(iter(gens.values())).matrix.shape[0]


def adjoint_generators(gens: dict | None = None) -> dict[tuple[int, int], So14Generator]:
    """10×10 matrices ad(J_p)[r, q] = coefficient of J_r in [J_p, J_q]."""
    gens = gens or build_generators()
    index = {lab: i for i, lab in enumerate(LABELS)}
    out = {}
    for p in LABELS:
        m = _zeros(len(LABELS))
        for q in LABELS:
            for r, c in decompose(bracket(gens[p].matrix, gens[q].matrix)).items():
                m[index[r], index[q]] = int(c) if c.denominator == 1 else c
        out[p] = So14Generator(p, m)
    return out


def raised(gens: dict, a: int, b: int) -> np.ndarray:
    return eta(a, a) * eta(b, b) * generator(gens, a, b)


def casimir_i1(gens: dict, ell) -> np.ndarray:
    ell = Fraction(ell)
    total = _zeros(_size(gens))
    for a in range(N5):
        for b in range(N5):
            if a != b:
                total = total + generator(gens, a, b).dot(raised(gens, a, b))
    return total / (2 * ell * ell)


def casimir_i1_split(gens: dict, ell) -> np.ndarray:
    """η^{αβ}Π_αΠ_β + (1/2ℓ²)η^{αλ}η^{βτ}J_{αβ}J_{λτ} in the listed form."""
    ell = Fraction(ell)
    s = scaled_generators(gens, ell)
    total = _zeros(_size(gens))
    for a in range(DIM):
        total = total + eta(a, a) * s[f"Pi_{a}"].dot(s[f"Pi_{a}"])
    lor = _zeros(_size(gens))
    for a in range(DIM):
        for b in range(DIM):
            if a != b:
                lor = lor + generator(gens, a, b).dot(raised(gens, a, b))
    return total + lor / (2 * ell * ell)


def _w_unscaled(gens: dict) -> list[np.ndarray]:
    """ε_{ABCDE} J^{BC} J^{DE} (no prefactor)."""
    out = []
    for a in range(N5):
        total = _zeros(_size(gens))
        for b, c, d, e in itertools.permutations([k for k in range(N5) if k != a]):
            if b > c or d > e:
                continue
            eps = levi_civita5((a, b, c, d, e))
            total = total + 4 * eps * raised(gens, b, c).dot(raised(gens, d, e))
        out.append(total)
    return out


def pauli_lubanski(gens: dict, ell) -> list[np.ndarray]:
    """W_A = (1/8ℓ) ε_{ABCDE} J^{BC} J^{DE}."""
    return [w / (8 * Fraction(ell)) for w in _w_unscaled(gens)]


def w4_lorentz(gens: dict) -> np.ndarray:
    """(1/8) ε_{4μνρτ} J^{μν} J^{ρτ}."""
    total = _zeros(_size(gens))
    for m, n, r, t in itertools.permutations(range(DIM)):
        total = total + levi_civita5((4, m, n, r, t)) * raised(gens, m, n).dot(raised(gens, r, t))
    return total * Fraction(1, 8)


def vector_v(gens: dict, ell) -> list[np.ndarray]:
    """V_α = −½ ε_{4αλμν} η^{λρ} Π_ρ J^{μν}."""
    s = scaled_generators(gens, ell)
    out = []
    for a in range(DIM):
        total = _zeros(_size(gens))
        for l, m, n in itertools.permutations([k for k in range(DIM) if k != a]):
            eps = levi_civita5((4, a, l, m, n))
            total = total + eps * eta(l, l) * s[f"Pi_{l}"].dot(raised(gens, m, n))
        out.append(total * Fraction(-1, 2))
    return out


def casimir_i2(gens: dict, ell) -> np.ndarray:
    """I2 = η^{AB} W_A W_B."""
    w = _w_unscaled(gens)
    total = _zeros(_size(gens))
    for a in range(N5):
        total = total + eta(a, a) * w[a].dot(w[a])
    return total / (64 * Fraction(ell) ** 2)


def _eigen_summary(m: np.ndarray) -> list[float]:
    vals = np.linalg.eigvals(np.array(m, dtype=np.float64))
    return sorted(float(np.round(v.real, 12)) + 0.0 for v in vals)


def _w_words(ell, lorentz_only: bool) -> dict:
    """Formal W_4 as a map from ordered generator-word pairs to exact coefficients.

    ``lorentz_only`` selects the Lorentz-index expression (1/8) ε_{4μνρτ}J^{μν}J^{ρτ};
    otherwise the A = 4 component of (1/8ℓ) ε_{ABCDE}J^{BC}J^{DE}.
    """
    words: dict = {}
    scale = Fraction(1, 8) if lorentz_only else Fraction(1, 8) / Fraction(ell)
    for b, c, d, e in itertools.permutations(range(DIM)):
        eps = levi_civita5((4, b, c, d, e))
        sign = eps * eta(b, b) * eta(c, c) * eta(d, d) * eta(e, e)
        p, sp = ((b, c), 1) if b < c else ((c, b), -1)
        q, sq = ((d, e), 1) if d < e else ((e, d), -1)
        words[(p, q)] = words.get((p, q), 0) + scale * sign * sp * sq
    return {k: v for k, v in words.items() if v != 0}


def w4_formal_ratio(ell) -> Fraction:
    """Exact ratio (Lorentz-index W_4) / (A = 4 component of W_A) as formal words."""
    lor = _w_words(ell, True)
    gen = _w_words(ell, False)
    if set(lor) != set(gen):
        raise AlgebraError("W_4 expressions have different word support")
    ratios = {lor[k] / gen[k] for k in lor}
    if len(ratios) != 1:
        raise AlgebraError("W_4 expressions are not proportional")
    return ratios.pop()


@dataclass(frozen=True)
class CasimirReport:
    ell: Fraction
    representation: str
    I1_central: bool
    I2_central: bool
    I2_nonzero: bool
    I1_scaling: bool  # I1(ℓ) = I1(1)/ℓ² exactly
    I1_split_equal: bool
    I1_split_equal_negated_pi: bool
    W4_formal_ratio: Fraction
    W4_matrix_equal: bool
    I1_eigenvalues: list
    I2_eigenvalues: list
    failing: list


def casimir_check(ell=1, gens: dict | None = None, representation: str = "vector") -> CasimirReport:
    """Centrality of I1 and I2 in the 5-dim ("vector") or 10-dim ("adjoint") representation."""
    if gens is None:
        gens = build_generators()
        if representation == "adjoint":
            gens = adjoint_generators(gens)
        elif representation != "vector":
            raise ValueError("representation must be 'vector' or 'adjoint'")
    ell = Fraction(ell)
    i1 = casimir_i1(gens, ell)
    i2 = casimir_i2(gens, ell)
    failing = []
    for lab, g in gens.items():
        if not is_zero(bracket(i1, g.matrix)):
            failing.append(("I1", lab))
        if not is_zero(bracket(i2, g.matrix)):
            failing.append(("I2", lab))
    split = casimir_i1_split(gens, ell)
    s = scaled_generators(gens, ell)
    pi_sq = _zeros(_size(gens))
    for a in range(DIM):
        pi_sq = pi_sq + eta(a, a) * s[f"Pi_{a}"].dot(s[f"Pi_{a}"])
    return CasimirReport(
        ell,
        representation,
        not any(f[0] == "I1" for f in failing),
        not any(f[0] == "I2" for f in failing),
        not is_zero(i2),
        exact_equal(i1 * ell * ell, casimir_i1(gens, 1)),
        exact_equal(split, i1),
        exact_equal(split - 2 * pi_sq, i1),
        w4_formal_ratio(ell),
        exact_equal(w4_lorentz(gens), pauli_lubanski(gens, ell)[4]),
        _eigen_summary(i1),
        _eigen_summary(i2),
        failing,
    )


# ---------------------------------------------------------------- contraction

@dataclass(frozen=True)
class ContractionReport:
    ells: list
    norms: list  # max-entry norm of [Π_0, Π_1] per ℓ
    norm_law: bool  # ‖[Π_α,Π_β]‖ = ‖J_αβ‖/ℓ² for all α<β and ℓ
    ratios: list  # norm(ℓ_i)/norm(ℓ_{i+1})
    ratio_law: bool  # ratios equal (ℓ_{i+1}/ℓ_i)²
    lorentz_invariant: bool  # [J_αβ, J_λτ] independent of ℓ


def contraction_scaling(ell_list=(1, 10, 100), gens: dict | None = None) -> ContractionReport:
    gens = gens or build_generators()
    ells = [Fraction(e) for e in ell_list]
    if any(e <= 0 for e in ells) or any(b <= a for a, b in zip(ells, ells[1:])):
        raise ValueError("ℓ values must be positive and increasing")
    norm_law = True
    norms = []
    for ell in ells:
        s = scaled_generators(gens, ell)
        for a, b in itertools.combinations(range(DIM), 2):
            n = max_abs(bracket(s[f"Pi_{a}"], s[f"Pi_{b}"]))
            norm_law &= n == max_abs(generator(gens, a, b)) / ell**2
        norms.append(max_abs(bracket(s["Pi_0"], s["Pi_1"])))
    ratios = [a / b for a, b in zip(norms, norms[1:])]
    ratio_law = all(r == (e2 / e1) ** 2 for r, e1, e2 in zip(ratios, ells, ells[1:]))
    lorentz = []
    for ell in ells:
        s = scaled_generators(gens, ell)
        lorentz.append([bracket(s[label_name(p)], s[label_name(q)])
                        for p, q in itertools.combinations([l for l in LABELS if l[1] < 4], 2)])
    invariant = all(exact_equal(x, y) for other in lorentz[1:] for x, y in zip(lorentz[0], other))
    return ContractionReport(ells, norms, norm_law, ratios, ratio_law, invariant)


# ---------------------------------------------------------------- conformal chart bridge

def conformal_field(ell: float, a: int, b: int, x) -> np.ndarray:
    """Chart components of J_ab: x_a ∂_b − x_b ∂_a, and J_a4 = ℓ ξ_a."""
    x = np.asarray(x, dtype=np.float64)
    if b == 4:
        return ell * killing_translations(ell, x)[..., a, :]
    return killing_rotations(ell, x)[..., a, b, :]


def ambient_rotation(a: int, b: int, X) -> np.ndarray:
    """η̊_aβ X^β ∂_b − η̊_bβ X^β ∂_a."""
    X = np.asarray(X, dtype=np.float64)
    out = np.zeros(X.shape)
    out[..., b] += ETA5_DIAG[a] * X[..., a]
    out[..., a] -= ETA5_DIAG[b] * X[..., b]
    return out


def ambient_boost_literal(mu: int, X) -> np.ndarray:
    """−X⁴ ∂_μ + X_μ ∂_4."""
    X = np.asarray(X, dtype=np.float64)
    out = np.zeros(X.shape)
    out[..., mu] = -X[..., 4]
    out[..., 4] = ETA5_DIAG[mu] * X[..., mu]
    return out


def ambient_boost_corrected(mu: int, X) -> np.ndarray:
    """−X⁴ ∂_μ − X_μ ∂_4 (the pushforward of the chart field)."""
    out = ambient_boost_literal(mu, X)
    out[..., 4] = -out[..., 4]
    return out


@dataclass(frozen=True)
class PushforwardReport:
    rotation_residual: float  # rotation generators
    boost_literal_residual: float  # boost generators, literal form
    boost_corrected_residual: float
    n_points: int


def pushforward_check(ell: float, x_points) -> PushforwardReport:
    from .desitter import desitter_chart

    chart = desitter_chart(ell)
    pts = np.atleast_2d(np.asarray(x_points, dtype=np.float64))
    for p in pts:
        chart.check(p)
    X = embed(ell, pts).X
    jac = embed_jacobian(ell, pts)
    rot = boost_p = boost_c = 0.0
    for a, b in LABELS:
        pushed = np.einsum("nka,na->nk", jac, conformal_field(ell, a, b, pts))
        if b < 4:
            rot = max(rot, float(np.max(np.abs(pushed - ambient_rotation(a, b, X)))))
        else:
            boost_p = max(boost_p, float(np.max(np.abs(pushed - ambient_boost_literal(a, X)))))
            boost_c = max(boost_c, float(np.max(np.abs(pushed - ambient_boost_corrected(a, X)))))
    return PushforwardReport(rot, boost_p, boost_c, len(pts))


def chart_sign(label: tuple[int, int]) -> int:
    """Sign s with (chart field for label) = s × (pushforward preimage of the ambient J_AB)."""
    return -1 if label[1] == 4 else 1


def fd_field_bracket(ell: float, p, q, x, h: float = 1e-5) -> np.ndarray:
    """[V, W]^μ = V^ν ∂_ν W^μ − W^ν ∂_ν V^μ by central differences."""
    x = np.asarray(x, dtype=np.float64)
    v = conformal_field(ell, *p, x)
    w = conformal_field(ell, *q, x)
    dv = fd_partials(lambda y: conformal_field(ell, *p, y), x, h)  # [ν, μ]
    dw = fd_partials(lambda y: conformal_field(ell, *q, y), x, h)
    return v @ dw - w @ dv


def bridge_residual(ell: float, x_points, gens: dict | None = None) -> float:
    """Max gap between finite-difference brackets of chart fields and the exact structure constants."""
    gens = gens or build_generators()
    pts = np.atleast_2d(np.asarray(x_points, dtype=np.float64))
    worst = 0.0
    for p, q in itertools.combinations(LABELS, 2):
        coeffs = decompose(bracket(gens[p].matrix, gens[q].matrix))
        for x in pts:
            fd = fd_field_bracket(ell, p, q, x)
            pred = np.zeros(DIM)
            for lab, c in coeffs.items():
                pred += float(c) * chart_sign(p) * chart_sign(q) * chart_sign(lab) * conformal_field(ell, *lab, x)
            worst = max(worst, float(np.max(np.abs(fd - pred))))
    return worst
