"""Model constants for the normalized abcd family with a variable bottom.

The solver works with the normalized system (b = d = 1), so a parameter
set is the quadruple (a, c, a1, c1) plus optional provenance describing
the physical modelling constants it came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["AbcdParams", "ValidationReport", "params_from_physical", "validate_generic_hamiltonian"]

_TOL = 1e-12


@dataclass(frozen=True)
class AbcdParams:
    """Normalized model constants.

    a, c are the dispersive constants of the normalized system, a1 and c1
    weight the bottom forcing.  theta/lambda_p/mu_p/b record provenance
    when the set was derived from physical constants; origin is either
    "physical" or "direct".
    """

    a: float
    c: float
    a1: float = 0.0
    c1: float = 0.0
    theta: float | None = None
    lambda_p: float | None = None
    mu_p: float | None = None
    b: float = 1.0
    origin: str = "direct"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = field(default_factory=tuple)


def params_from_physical(theta: float, lambda_p: float, mu_p: float, b: float) -> AbcdParams:
    """Build a normalized parameter set from physical modelling constants.

    Raw constants:
        a_raw = (theta^2 - 1/3) lambda_p / 2     b_raw = (theta^2 - 1/3)(1 - lambda_p) / 2
        c_raw = (1 - theta^2) mu_p / 2           d_raw = (1 - theta^2)(1 - mu_p) / 2
        a1_raw = ((1 - lambda_p)(theta^2 - 1/3) + 1 - 2 theta) / 2
        c1_raw = 1 - theta

    The Hamiltonian-generic regime requires b_raw = d_raw > 0 and
    a_raw, c_raw < 0; the supplied b must equal the computed b_raw.
    Everything is then divided by b_raw so the returned set has b = d = 1.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if b <= 0.0:
        raise ValueError(f"b must be positive, got {b}")

    t2 = theta * theta
    a_raw = 0.5 * (t2 - 1.0 / 3.0) * lambda_p
    b_raw = 0.5 * (t2 - 1.0 / 3.0) * (1.0 - lambda_p)
    c_raw = 0.5 * (1.0 - t2) * mu_p
    d_raw = 0.5 * (1.0 - t2) * (1.0 - mu_p)
    a1_raw = 0.5 * ((1.0 - lambda_p) * (t2 - 1.0 / 3.0) + 1.0 - 2.0 * theta)
    c1_raw = 1.0 - theta

    if abs(a_raw + b_raw + c_raw + d_raw - 1.0 / 3.0) > _TOL:
        raise ValueError("raw constants violate the sum rule a+b+c+d = 1/3")
    if b_raw <= 0.0:
        raise ValueError(f"b_raw must be positive, got {b_raw}")
    if abs(b_raw - d_raw) > _TOL:
        raise ValueError(f"generic Hamiltonian regime needs b = d, got b_raw={b_raw}, d_raw={d_raw}")
    if abs(b_raw - b) > _TOL * max(1.0, abs(b)):
        raise ValueError(f"supplied b={b} does not match computed b_raw={b_raw}")
    if a_raw >= 0.0:
        raise ValueError(f"a_raw must be negative, got {a_raw}")
    if c_raw >= 0.0:
        raise ValueError(f"c_raw must be negative, got {c_raw}")

    return AbcdParams(
        a=a_raw / b_raw,
        c=c_raw / b_raw,
        a1=a1_raw / b_raw,
        c1=c1_raw / b_raw,
        theta=theta,
        lambda_p=lambda_p,
        mu_p=mu_p,
        b=b_raw,
        origin="physical",
    )


def validate_generic_hamiltonian(p: AbcdParams) -> ValidationReport:
    """Check the sign constraints of the generic Hamiltonian regime.

    Constraints on the normalized set: a < 0, c < 0 and c >= -1.  The
    endpoint c = -1 is admissible (it is the strong-dispersion corner);
    theta-derived sets satisfy c > -1 strictly by construction.
    """
    bad = []
    if not p.a < 0.0:
        bad.append("a < 0")
    if not p.c < 0.0:
        bad.append("c < 0")
    if p.c < -1.0 - _TOL:
        bad.append("c > -1")
    return ValidationReport(ok=not bad, violations=tuple(bad))
