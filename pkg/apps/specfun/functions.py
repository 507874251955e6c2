"""Double-precision special functions: Γ, Riemann ζ and K₀/K₁.

Every function is pure and thread-safe.
"""

import logging
import math

from helpers import (
    ArgumentRangeError,
    ConvergenceError,
    DomainError,
    PoleError,
    UnsupportedArgumentError,
)

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286060651209008240243
SQRT_TWO_PI = 2.50662827463100050241576528481104525

# Γ is finite in double precision up to ~171.6; the guard stays below it.
GAMMA_ARGUMENT_LIMIT = 170.0

# Results below this are flushed to exact zero and flagged.
UNDERFLOW_THRESHOLD = 1e-300
BESSEL_UNDERFLOW_ARGUMENT = 700.0

# ==========================
# Gamma function
# ==========================

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _sinpi(x: float) -> float:
    """sin(πx) with the argument reduced exactly modulo 2."""
    r = math.fmod(x, 2.0)
    if r < 0.0:
        r += 2.0
    if r <= 0.5:
        return math.sin(math.pi * r)
    if r <= 1.5:
        return math.sin(math.pi * (1.0 - r))
    return math.sin(math.pi * (r - 2.0))


def _lanczos(x: float) -> float:
    """Γ(x) for x ≥ 1/2."""
    z = x - 1.0
    series = _LANCZOS_COEFFICIENTS[0]
    for i in range(1, len(_LANCZOS_COEFFICIENTS)):
        series += _LANCZOS_COEFFICIENTS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # t**(z+1/2) is split in two halves so it cannot overflow before e^-t
    half_power = t ** (0.5 * (z + 0.5))
    return SQRT_TWO_PI * half_power * (half_power * math.exp(-t)) * series


def gamma(x: float) -> float:
    """Euler's gamma function for real arguments.

    Args:
        x: Real argument, not a nonpositive integer, |x| ≤ 170

    Returns:
        Γ(x) with relative error around 1e-15

    Raises:
        PoleError: If x is 0, -1, -2, ...
        ArgumentRangeError: If |x| > 170 (result not representable)

    Example:
        >>> round(gamma(5.0), 10)
        24.0
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma argument {x} is not finite")
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    if abs(x) > GAMMA_ARGUMENT_LIMIT:
        raise ArgumentRangeError(
            f"gamma({x}) is outside the double-precision range |x| <= "
            f"{GAMMA_ARGUMENT_LIMIT}"
        )

    if x < 0.5:
        return math.pi / (_sinpi(x) * _lanczos(1.0 - x))
    return _lanczos(x)


# ==========================
# Riemann zeta function
# ==========================

# B_2, B_4, ..., B_20
_BERNOULLI_EVEN = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)
_EULER_MACLAURIN_CUT = 10


def _zeta_euler_maclaurin(s: float) -> float:
    """ζ(s) from the partial sum to N-1 plus the Euler–Maclaurin tail.

    The tail is ∫_N^∞ t^-s dt + N^-s/2 plus the Bernoulli corrections,
    which is also the analytic continuation for s < 1.
    """
    n = _EULER_MACLAURIN_CUT
    head = math.fsum(k ** -s for k in range(1, n))

    big_n = float(n)
    tail = [big_n ** (1.0 - s) / (s - 1.0), 0.5 * big_n ** -s]

    rising = s  # s(s+1)...(s+2k-2)
    power = big_n ** (-s - 1.0)
    factorial = 2.0  # (2k)!
    for k, bernoulli in enumerate(_BERNOULLI_EVEN, start=1):
        tail.append(bernoulli / factorial * rising * power)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= big_n * big_n
        factorial *= (2 * k + 1) * (2 * k + 2)

    return head + math.fsum(tail)


def reflect_zeta(s: float, zeta_s: float) -> float:
    """Map a known ζ(s) to ζ(1-s) through the functional equation.

    Γ(s/2)π^(-s/2)ζ(s) = Γ((1-s)/2)π^((s-1)/2)ζ(1-s)

    Args:
        s: Argument at which ``zeta_s`` is known
        zeta_s: The value ζ(s)

    Returns:
        ζ(1-s). Trivial zeros (1-s = -2, -4, ...) come back as exact 0.

    Raises:
        PoleError: If 1-s = 1
        UnsupportedArgumentError: If s itself is a trivial zero, where the
            reflected value cannot be recovered from ζ(s) = 0
    """
    s = float(s)
    target = 1.0 - s
    if target == 1.0:
        raise PoleError("zeta has a pole at s = 1")
    if target < 0.0 and target == math.floor(target) and target % 2.0 == 0.0:
        return 0.0
    if s <= 0.0 and s == math.floor(s) and s % 2.0 == 0.0:
        raise UnsupportedArgumentError(
            f"cannot reflect from the trivial zero s = {s}"
        )

    factor = gamma(0.5 * s) / gamma(0.5 * target) * math.pi ** (0.5 - s)
    value = factor * zeta_s
    if not math.isfinite(value):
        raise ArgumentRangeError(f"zeta({target}) overflows double precision")
    return value


def riemann_zeta(s: float) -> float:
    """Riemann zeta function for real s ≠ 1.

    Uses the Euler–Maclaurin summed series for s ≥ 1/2 and the reflection
    formula from ζ(1-s) below that; ζ(0) = -1/2 is the reflection limit.

    Raises:
        PoleError: At s = 1

    Example:
        >>> round(riemann_zeta(-1.0), 15)
        -0.083333333333333
    """
    s = float(s)
    if not math.isfinite(s):
        raise DomainError(f"zeta argument {s} is not finite")
    if s == 1.0:
        raise PoleError("zeta has a pole at s = 1")
    if s == 0.0:
        return -0.5
    if s >= 0.5:
        return _zeta_euler_maclaurin(s)
    return reflect_zeta(1.0 - s, _zeta_euler_maclaurin(1.0 - s))


# ==========================
# Modified Bessel functions K0, K1
# ==========================

_SERIES_SWITCH = 2.0
_CONTINUED_FRACTION_EPS = 1e-16
_CONTINUED_FRACTION_MAX_ITERATIONS = 10_000


def _k_series(x: float) -> tuple[float, float]:
    """K₀(x), K₁(x) from the ascending series, for 0 < x ≤ 2."""
    y = 0.25 * x * x
    log_half = math.log(0.5 * x)

    term = 1.0  # y^k / (k!)^2
    psi = -EULER_GAMMA  # ψ(k+1)
    i0_sum = 0.0
    i1_sum = 0.0
    k0_sum = 0.0
    k1_sum = 0.0
    k = 0
    while True:
        shifted = term / (k + 1)  # y^k / (k!(k+1)!)
        psi_next = psi + 1.0 / (k + 1)
        i0_sum += term
        i1_sum += shifted
        k0_sum += psi * term
        k1_sum += (psi + psi_next) * shifted
        if term <= 1e-18 * i0_sum:
            break
        k += 1
        term *= y / (k * k)
        psi = psi_next

    i1 = 0.5 * x * i1_sum
    k0 = -log_half * i0_sum + k0_sum
    k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_sum
    return k0, k1


def _k_continued_fraction(x: float) -> tuple[float, float]:
    """K₀(x), K₁(x) by Steed's method on Temme's second continued fraction.

    Valid for x ≳ 2; converges to full double precision and reduces to the
    large-argument asymptotic series √(π/2x)e^-x(1 - 1/8x + ...).
    """
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CONTINUED_FRACTION_MAX_ITERATIONS):
        a -= 2 * (i - 1)
        c = -a * c / i
        q_new = (q1 - b * q2) / a
        q1 = q2
        q2 = q_new
        q += c * q_new
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _CONTINUED_FRACTION_EPS:
            break
    else:
        raise ConvergenceError(f"Bessel continued fraction stalled at x = {x}")

    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k0_k1(x: float) -> tuple[float, float]:
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"modified Bessel K requires x > 0, got {x}")
    if x > BESSEL_UNDERFLOW_ARGUMENT:
        return 0.0, 0.0
    if x <= _SERIES_SWITCH:
        return _k_series(x)
    return _k_continued_fraction(x)


def bessel_k_ex(order: int, x: float) -> tuple[float, bool]:
    """K_order(x) together with an underflow flag.

    Returns:
        ``(value, underflowed)``; values below 1e-300 are returned as
        exact 0 with ``underflowed`` set.

    Raises:
        UnsupportedArgumentError: If order is not 0 or 1
        DomainError: If x ≤ 0
    """
    if order not in (0, 1):
        raise UnsupportedArgumentError(
            f"only orders 0 and 1 are implemented, got {order}"
        )
    k0, k1 = _k0_k1(x)
    value = k0 if order == 0 else k1
    if value < UNDERFLOW_THRESHOLD:
        return 0.0, True
    return value, False


def bessel_k(order: int, x: float) -> float:
    """Modified Bessel function of the second kind, orders 0 and 1.

    Example:
        >>> bessel_k(1, 1.0) > bessel_k(0, 1.0)
        True
    """
    return bessel_k_ex(order, x)[0]


def bessel_k1_prime(x: float) -> float:
    """dK₁/dx = -K₀(x) - K₁(x)/x; strictly negative for x > 0."""
    k0, k1 = _k0_k1(x)
    value = -k0 - k1 / x
    if -value < UNDERFLOW_THRESHOLD:
        return 0.0
    return value
