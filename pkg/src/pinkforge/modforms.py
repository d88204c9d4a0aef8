"""Level-one q-expansions over F_p: the discriminant form and its powers,
Hecke operators, prime-coefficient densities, cyclotomicity sweeps, and
finite Hecke-stable spans.

Series are dense and truncated: a degree-N series knows its coefficients
a_0..a_N exactly.  Multiplication truncates to the smaller degree.  In
characteristic 2 coefficients are kept bit-packed in a python integer
(bit n = a_n), which makes products by sparse factors a run of shifted
XORs; odd characteristic uses numpy arrays with exact FFT convolution.
"""

from dataclasses import dataclass, field

import numpy as np

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    def mpz(x):
        return x


class DegreeExhausted(RuntimeError):
    pass


class TooLarge(RuntimeError):
    pass


SPARSE_CUTOFF = 6000       # popcount below which GF(2) products use shifts
_FFT_GUARD = 2 ** 52       # exactness bound for float64 convolution


class FpSeries:
    """Truncated power series over F_p.

    p = 2: `bits` holds the coefficients as an integer bitset.
    p > 2: `coef` is an int64 array of length deg+1 with entries in [0, p).
    """

    __slots__ = ("p", "deg", "bits", "coef")

    def __init__(self, p, deg, bits=None, coef=None):
        self.p = p
        self.deg = int(deg)
        if p == 2:
            mask = (1 << (self.deg + 1)) - 1
            self.bits = int(bits if bits is not None else 0) & mask
            self.coef = None
        else:
            self.bits = None
            if coef is None:
                coef = np.zeros(self.deg + 1, dtype=np.int64)
            coef = np.asarray(coef, dtype=np.int64) % p
            if coef.shape[0] < self.deg + 1:
                coef = np.concatenate([coef, np.zeros(self.deg + 1 - coef.shape[0], dtype=np.int64)])
            self.coef = coef[: self.deg + 1]

    @classmethod
    def from_coeffs(cls, p, coeffs, deg=None):
        coeffs = list(coeffs)
        deg = deg if deg is not None else len(coeffs) - 1
        if p == 2:
            bits = 0
            for n, c in enumerate(coeffs[: deg + 1]):
                if c % 2:
                    bits |= 1 << n
            return cls(2, deg, bits=bits)
        return cls(p, deg, coef=np.array(coeffs[: deg + 1], dtype=np.int64))

    @classmethod
    def from_support(cls, p, deg, support, values=None):
        if p == 2:
            bits = 0
            for e in support:
                if e <= deg:
                    bits ^= 1 << e
            return cls(2, deg, bits=bits)
        coef = np.zeros(deg + 1, dtype=np.int64)
        for i, e in enumerate(support):
            if e <= deg:
                coef[e] = (coef[e] + (1 if values is None else values[i])) % p
        return cls(p, deg, coef=coef)

    # -- accessors -----------------------------------------------------------
    def coeff(self, n):
        if n > self.deg or n < 0:
            raise IndexError(f"coefficient {n} beyond truncation {self.deg}")
        if self.p == 2:
            return (self.bits >> n) & 1
        return int(self.coef[n])

    def coeffs_array(self):
        if self.p == 2:
            nbytes = self.deg // 8 + 1
            raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
            arr = np.unpackbits(raw, bitorder="little")[: self.deg + 1]
            return arr.astype(np.int64)
        return self.coef.copy()

    def support(self):
        if self.p == 2:
            out = []
            x = self.bits
            while x:
                n = (x & -x).bit_length() - 1
                out.append(n)
                x &= x - 1
            return out
        return np.nonzero(self.coef)[0].tolist()

    def popcount(self):
        if self.p == 2:
            return int(self.bits).bit_count()
        return int((self.coef != 0).sum())

    def is_zero(self):
        return self.bits == 0 if self.p == 2 else not self.coef.any()

    def truncate(self, deg):
        if deg > self.deg:
            raise ValueError("cannot extend a truncated series")
        if self.p == 2:
            return FpSeries(2, deg, bits=self.bits)
        return FpSeries(self.p, deg, coef=self.coef[: deg + 1])

    # -- ring operations -------------------------------------------------------
    def _align(self, other):
        if not isinstance(other, FpSeries) or other.p != self.p:
            raise ValueError("series over different primes")
        return min(self.deg, other.deg)

    def __add__(self, other):
        deg = self._align(other)
        if self.p == 2:
            return FpSeries(2, deg, bits=self.bits ^ other.bits)
        return FpSeries(self.p, deg, coef=(self.coef[: deg + 1] + other.coef[: deg + 1]) % self.p)

    def __sub__(self, other):
        deg = self._align(other)
        if self.p == 2:
            return FpSeries(2, deg, bits=self.bits ^ other.bits)
        return FpSeries(self.p, deg, coef=(self.coef[: deg + 1] - other.coef[: deg + 1]) % self.p)

    def __eq__(self, other):
        if not isinstance(other, FpSeries) or other.p != self.p:
            return False
        deg = min(self.deg, other.deg)
        if self.p == 2:
            mask = (1 << (deg + 1)) - 1
            return (self.bits & mask) == (other.bits & mask)
        return np.array_equal(self.coef[: deg + 1], other.coef[: deg + 1])

    def __hash__(self):
        return hash((self.p, self.deg, self.bits if self.p == 2 else self.coef.tobytes()))

    def scale(self, c):
        c %= self.p
        if self.p == 2:
            return FpSeries(2, self.deg, bits=self.bits if c else 0)
        return FpSeries(self.p, self.deg, coef=(self.coef * c) % self.p)

    def shift(self, k):
        """Multiply by q^k; exactness extends to deg + k."""
        if self.p == 2:
            return FpSeries(2, self.deg + k, bits=self.bits << k)
        coef = np.zeros(self.deg + k + 1, dtype=np.int64)
        coef[k:] = self.coef
        return FpSeries(self.p, self.deg + k, coef=coef)

    def dilate(self, a, out_deg=None):
        """f(q) -> f(q^a); exactness extends to a·deg + a - 1, so out_deg
        may exceed the input degree up to that bound."""
        max_deg = (self.deg + 1) * a - 1
        out_deg = self.deg if out_deg is None else min(out_deg, max_deg)
        top = min(self.deg, out_deg // a)
        if self.p == 2:
            arr = self.coeffs_array()
            idx = np.nonzero(arr[: top + 1])[0]
            out = np.zeros(out_deg + 1, dtype=np.uint8)
            out[idx * a] = 1
            bits = int.from_bytes(np.packbits(out, bitorder="little").tobytes(), "little")
            return FpSeries(2, out_deg, bits=bits)
        coef = np.zeros(out_deg + 1, dtype=np.int64)
        coef[:: a][: top + 1] = self.coef[: top + 1]
        return FpSeries(self.p, out_deg, coef=coef)


def series_mul(f, g):
    """Exact truncated product; degree = min of the operand degrees."""
    if f.p != g.p:
        raise ValueError("series over different primes")
    deg = min(f.deg, g.deg)
    p = f.p
    if p == 2:
        if f.popcount() > g.popcount():
            f, g = g, f
        if f.popcount() <= SPARSE_CUTOFF:
            mask = (1 << (deg + 1)) - 1
            acc = 0
            gb = g.bits
            for e in f.support():
                acc ^= gb << e
            return FpSeries(2, deg, bits=acc & mask)
        return FpSeries(2, deg, bits=_gf2_dense_mul(f.bits, g.bits, deg))
    a = f.coef[: deg + 1]
    b = g.coef[: deg + 1]
    if (deg + 1) * (p - 1) * (p - 1) < _FFT_GUARD and deg > 512:
        from scipy.signal import fftconvolve
        conv = fftconvolve(a.astype(np.float64), b.astype(np.float64))[: deg + 1]
        coef = np.rint(conv).astype(np.int64) % p
    else:
        coef = np.convolve(a, b)[: deg + 1] % p
    return FpSeries(p, deg, coef=coef)


def _gf2_dense_mul(a_bits, b_bits, deg):
    """Carry-less product via 32-bit coefficient slots in a wide integer.

    Spreading each bit into its own 32-bit slot makes the plain integer
    product hold the convolution counts (bounded by deg+1 < 2^32) without
    carry interference; the parities live in the slot LSBs.
    """
    n = deg + 1
    A = _spread_bits(a_bits, n)
    B = _spread_bits(b_bits, n)
    prod = A * B
    nbytes = 8 * n  # read the low 2n slots of the product
    raw = int(prod).to_bytes(nbytes + 8, "little")[:nbytes]
    slots = np.frombuffer(raw, dtype=np.uint32)[:n]
    parity = (slots & 1).astype(np.uint8)
    return int.from_bytes(np.packbits(parity, bitorder="little").tobytes(), "little")


def _spread_bits(x, nbits):
    """Place bit i of x at bit 32·i of a wide integer."""
    x = int(x) & ((1 << nbits) - 1)
    raw = np.frombuffer(x.to_bytes(nbits // 8 + 1, "little"), dtype=np.uint8)
    arr = np.unpackbits(raw, bitorder="little")[:nbits].astype(np.uint32)
    return mpz(int.from_bytes(arr.tobytes(), "little"))


def series_pow(f, n):
    """f^n by square-and-multiply with the Frobenius shortcut: in
    characteristic p, f^p is the index dilation of f by p.

    For p = 2 the odd case recurses through n-1, so every multiplication
    keeps f itself as one factor; powers of a sparse series never hit the
    dense-product path."""
    if n < 0:
        raise ValueError("negative powers of series are not defined")
    if n == 0:
        return FpSeries.from_coeffs(f.p, [1], deg=f.deg)
    if n == 1:
        return f
    p = f.p
    if n % p == 0:
        # the p-power only needs the inner factor to deg/p
        inner = series_pow(f.truncate(f.deg // p), n // p)
        return inner.dilate(p, out_deg=f.deg)
    if p == 2:
        return series_mul(series_pow(f, n - 1), f)
    half = series_pow(f, n // 2)
    out = series_mul(half, half)
    if n % 2:
        out = series_mul(out, f)
    return out


def eta_product_term(p, deg):
    """prod_{n>=1} (1 - q^n) truncated: the pentagonal-number series
    sum_k (-1)^k q^{k(3k-1)/2}."""
    support, values = [], []
    k = 1
    support.append(0)
    values.append(1)
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 > deg and e2 > deg:
            break
        sign = 1 if k % 2 == 0 else -1
        if e1 <= deg:
            support.append(e1)
            values.append(sign)
        if e2 <= deg:
            support.append(e2)
            values.append(sign)
        k += 1
    return FpSeries.from_support(p, deg, support, values)


def delta_expansion(p, N):
    """The discriminant form q·prod (1-q^n)^24 mod p, to degree N.

    The 24th power runs through the characteristic: 24 = 8·3, and p-power
    exponents are index dilations, so only the p-coprime part of the
    exponent costs multiplications.
    """
    if N < 1:
        raise ValueError("degree must be at least 1")
    P = eta_product_term(p, N - 1)
    P24 = series_pow(P, 24)
    return P24.shift(1)


def delta_power(p, n, N):
    """Delta^n mod p to degree N, via the sparse power ladder on Delta."""
    d = delta_expansion(p, N)
    return series_pow(d, n)


# -- Hecke operators -------------------------------------------------------------

def _check_prime(ell):
    if ell < 2 or any(ell % d == 0 for d in range(2, int(ell ** 0.5) + 1)):
        raise ValueError(f"{ell} is not prime")


def hecke_U(ell, f):
    """U_ell: a_n -> a_{n·ell}; output degree deg//ell."""
    _check_prime(ell)
    out_deg = f.deg // ell
    if f.p == 2:
        arr = f.coeffs_array()
        sub = arr[:: ell][: out_deg + 1]
        bits = int.from_bytes(np.packbits(sub.astype(np.uint8), bitorder="little").tobytes(), "little")
        return FpSeries(2, out_deg, bits=bits)
    return FpSeries(f.p, out_deg, coef=f.coef[:: ell][: out_deg + 1])


def hecke_V(ell, f, out_deg=None):
    """V_ell: a_n -> a at index n·ell (f(q^ell))."""
    out_deg = f.deg if out_deg is None else out_deg
    if f.p == 2:
        out = 0
        x = f.bits
        while x:
            n = (x & -x).bit_length() - 1
            if n * ell > out_deg:
                break
            out |= 1 << (n * ell)
            x &= x - 1
        return FpSeries(2, out_deg, bits=out)
    coef = np.zeros(out_deg + 1, dtype=np.int64)
    top = out_deg // ell
    coef[:: ell][: top + 1] = f.coef[: top + 1]
    return FpSeries(f.p, out_deg, coef=coef)


def hecke_T(ell, k_eff, f):
    """T_ell at level one: a_n -> a_{n·ell} + ell^{k_eff - 1}·a_{n/ell},
    with the weight entering only through ell^{k-1} mod p (k mod (p-1))."""
    _check_prime(ell)
    p = f.p
    if ell == p:
        return hecke_U(ell, f)
    out_deg = f.deg // ell
    u = hecke_U(ell, f)
    exp = (k_eff - 1) % (p - 1) if p > 2 else 0
    factor = pow(ell % p, exp, p)
    v = hecke_V(ell, f, out_deg=out_deg)
    return u + v.scale(factor)


# -- density sweeps ---------------------------------------------------------------

def prime_sieve(X):
    is_p = np.ones(X + 1, dtype=bool)
    is_p[:2] = False
    for i in range(2, int(X ** 0.5) + 1):
        if is_p[i]:
            is_p[i * i:: i] = False
    return np.nonzero(is_p)[0]


@dataclass
class DensityReport:
    X: int
    Np: int
    counted: int
    total_primes: int
    estimate: float
    checkpoints: list = field(default_factory=list)

    def to_dict(self):
        return {
            "X": self.X,
            "Np": self.Np,
            "counted": self.counted,
            "total_primes": self.total_primes,
            "estimate": self.estimate,
            "checkpoints": [
                {"X": x, "counted": c, "total": t, "estimate": e}
                for (x, c, t, e) in self.checkpoints
            ],
        }


def density_sweep(f, X, Np=None):
    """Exact count of primes ell <= X, ell not dividing Np, with a_ell != 0,
    with checkpoints at X/8, X/4, X/2, X.  Np is the level-characteristic
    product and always absorbs p; it defaults to p itself (level one)."""
    if f.deg < X:
        raise DegreeExhausted(f"series degree {f.deg} below sweep bound {X}")
    Np = f.p if Np is None else Np
    if Np % f.p:
        Np *= f.p
    primes = prime_sieve(X)
    primes = primes[np.gcd(primes, Np) == 1]
    arr = f.coeffs_array()
    hits = arr[primes] != 0
    checkpoints = []
    for frac in (8, 4, 2, 1):
        bound = X // frac
        sel = primes <= bound
        tot = int(sel.sum())
        cnt = int(hits[sel].sum())
        checkpoints.append((bound, cnt, tot, (cnt / tot) if tot else 0.0))
    cnt, tot = checkpoints[-1][1], checkpoints[-1][2]
    return DensityReport(X=X, Np=Np, counted=cnt, total_primes=tot,
                         estimate=(cnt / tot) if tot else 0.0, checkpoints=checkpoints)


def cyclotomic_test(f, M, X, Np=1):
    """Is a_ell constant on residue classes mod M over primes ell <= X
    (ell coprime to M·Np·p)?  Returns (verdict, table) or (False, (ell, ell'))
    for the first violating pair."""
    if f.deg < X:
        raise DegreeExhausted(f"series degree {f.deg} below sweep bound {X}")
    primes = prime_sieve(X)
    excl = M * Np * f.p
    primes = primes[np.gcd(primes, excl) == 1]
    arr = f.coeffs_array()
    table = {}
    first = {}
    for ell in primes.tolist():
        r = ell % M
        v = int(arr[ell])
        if r not in table:
            table[r] = v
            first[r] = ell
        elif table[r] != v:
            return False, (first[r], ell)
    return True, table


# -- Hecke spans -------------------------------------------------------------------

@dataclass
class HeckeSpan:
    p: int
    basis: list                 # FpSeries, echelonized by leading index
    usable_deg: int
    matrices: dict              # ell -> np.ndarray, columns = images of basis
    generator_primes: list

    @property
    def dim(self):
        return len(self.basis)


MIN_USABLE_DEG = 16


def _leading_index(f, deg):
    for n in f.support():
        if n <= deg:
            return n
    return None


def _reduce_against(f, basis, deg, p):
    """Echelon reduction of f against basis rows up to degree deg.

    Returns (residual, coords)."""
    coords = np.zeros(len(basis), dtype=np.int64)
    g = f
    for i, (b, lead) in enumerate(basis):
        if lead > g.deg or lead > deg:
            raise DegreeExhausted("basis lead beyond the comparable degree")
        c = g.coeff(lead)
        if c:
            factor = (c * pow(int(b.coeff(lead)), -1, p)) % p
            g = g - b.scale(factor)
            coords[i] = factor
    return g, coords


def hecke_span(f, primes, deg_budget=None, max_dim=64, k_eff=0):
    """Stable span of f under the given Hecke operators.

    Usable degree shrinks by a factor ell at each application; every basis
    vector tracks it, comparisons happen at the common usable degree, and
    DegreeExhausted is raised instead of comparing silently-truncated tails.
    """
    p = f.p
    deg = deg_budget if deg_budget is not None else f.deg
    f = f.truncate(deg)
    basis = []          # (series, leading index) pairs
    usable = deg

    def add_vector(g, gdeg):
        nonlocal usable
        usable = min(usable, gdeg)
        if usable < MIN_USABLE_DEG:
            raise DegreeExhausted("usable degree fell below the comparison floor")
        res, _ = _reduce_against(g, basis, usable, p)
        if res.truncate(usable).is_zero():
            return False
        lead = _leading_index(res, usable)
        if lead is None:
            return False
        basis.append((res, lead))
        basis.sort(key=lambda t: t[1])
        if len(basis) > max_dim:
            raise TooLarge("span dimension exceeded max_dim")
        return True

    add_vector(f, deg)
    frontier = [(f, deg)]
    while frontier:
        new = []
        for (g, gdeg) in frontier:
            for ell in primes:
                img = hecke_T(ell, k_eff, g)
                if add_vector(img, gdeg // ell):
                    new.append((img, gdeg // ell))
        frontier = new
    # matrices of each operator on the stabilized basis
    matrices = {}
    for ell in primes:
        cols = []
        for (b, _) in basis:
            img = hecke_T(ell, k_eff, b)
            res, coords = _reduce_against(img, basis, usable // ell, p)
            if not res.truncate(usable // ell).is_zero():
                raise ArithmeticError("span not stable at matrix extraction")
            cols.append(coords)
        matrices[ell] = np.array(cols, dtype=np.int64).T % p
    return HeckeSpan(p=p, basis=[b for (b, _) in basis], usable_deg=usable,
                     matrices=matrices, generator_primes=list(primes))


def nilpotency_check(span, ell, lam):
    """Least k with (M_ell - lam·Id)^k = 0 on the span, else (None, witness)."""
    M = (span.matrices[ell] - lam * np.eye(span.dim, dtype=np.int64)) % span.p
    Mk = M.copy()
    for k in range(1, span.dim + 1):
        if not Mk.any():
            return k, None
        Mk = (Mk @ M) % span.p
    if not Mk.any():
        return span.dim + 1, None
    return None, Mk
