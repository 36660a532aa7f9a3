"""Eisenstein series E_k(eta, psi) as adelic q-expansions.

Nonconstant coefficients are the divisor sums
a_m = sum over a | m of eta(m/a) * psi(a) * N(a)^(k-1); constant terms are
supplied, since computing them needs L-values.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import attrs
from pydantic import BaseModel, Field

from core.characters import IdealCharacter, RawValue, raw_value
from core.coeff_ring import CoefficientRing, Element
from core.errors import ConfigError
from core.ideals import IdealHNF, NarrowClassData, are_coprime, divisors, prime_ideals_up_to
from core.qexp import AdelicSeries, WeightVector, series_from_function

logger = logging.getLogger(__name__)

# primes up to this norm are used by validate_constant_tuple
CONSTANT_CHECK_NORM = 25


@attrs.frozen
class EisensteinSpec:
    """Data of a parallel weight Eisenstein series.

    Attributes:
        eta: Character applied to the cofactor m/a.
        psi: Character applied to the divisor a.
        k: Parallel weight, at least 1.
        constant: Constant term per narrow class, before scaling.
        bound: Precision of the generated series.
        scale: Multiplier applied to every coefficient and constant.
    """

    eta: IdealCharacter
    psi: IdealCharacter
    k: int
    constant: Tuple = attrs.field(converter=tuple)
    bound: int
    scale: RawValue = 1

    @property
    def ring(self) -> CoefficientRing:
        return self.eta.ring

    @property
    def weight(self) -> WeightVector:
        return WeightVector.parallel_weight(self.k)

    def constant_values(self) -> List[Element]:
        return [raw_value(self.ring, value) for value in self.constant]

    def over(self, ring: CoefficientRing) -> "EisensteinSpec":
        return EisensteinSpec(self.eta.over(ring), self.psi.over(ring), self.k, self.constant, self.bound, self.scale)


def divisor_sum(spec: EisensteinSpec, ideal: IdealHNF) -> Element:
    ring = spec.ring
    total = ring.zero
    for divisor in divisors(ideal):
        weight_factor = ring.from_int(int(divisor.norm()) ** (spec.k - 1))
        total = total + spec.eta(ideal / divisor) * spec.psi(divisor) * weight_factor
    return total


def eisenstein_series(spec: EisensteinSpec, classes: NarrowClassData) -> AdelicSeries:
    """Generates the q-expansion of a parallel weight Eisenstein series.

    Raises:
        InsufficientDataError: When a table character lacks a needed prime.
    """
    if spec.k < 1:
        raise ConfigError("Eisenstein series need parallel weight at least 1", k=spec.k)
    if len(spec.constant) != classes.h_plus:
        raise ConfigError("constant tuple needs one entry per narrow class", expected=classes.h_plus)
    ring = spec.ring
    scale = raw_value(ring, spec.scale)
    constant = [scale * value for value in spec.constant_values()]
    logger.info("---EISENSTEIN: weight %d, bound %d---", spec.k, spec.bound)
    return series_from_function(
        classes, ring, spec.weight, spec.bound, constant, lambda ideal: scale * divisor_sum(spec, ideal)
    )


def hecke_eigenvalue(spec: EisensteinSpec, prime: IdealHNF) -> Element:
    """eta(p) + psi(p) * N(p)^(k-1)."""
    ring = spec.ring
    return spec.eta(prime) + spec.psi(prime) * ring.from_int(int(prime.norm()) ** (spec.k - 1))


class ConstantTupleReport(BaseModel):
    """Outcome of the Hecke compatibility check of an Eisenstein constant tuple."""

    ok: bool = Field(description="True when every checked prime and class passes.")
    checked_primes: List[str] = Field(default_factory=list, description="Labels of the primes checked.")
    witness_class: Optional[int] = Field(default=None, description="Class index of the first failure.")
    witness_prime: Optional[str] = Field(default=None, description="Label of the first failing prime.")


def validate_constant_tuple(
    spec: EisensteinSpec, classes: NarrowClassData, max_norm: int = CONSTANT_CHECK_NORM
) -> ConstantTupleReport:
    """Checks the constant tuple against the Hecke action on constants.

    For every prime p of norm at most ``max_norm`` coprime to both moduli and
    every class lambda:
    a0[t_lambda p] + eta(p) psi(p) N(p)^(k-1) a0[t_lambda / p] = a_p * a0[t_lambda].
    """
    ring = spec.ring
    constant = spec.constant_values()
    if len(constant) != classes.h_plus:
        raise ConfigError("constant tuple needs one entry per narrow class", expected=classes.h_plus)
    modulus = spec.eta.modulus * spec.psi.modulus
    checked = []
    for prime in prime_ideals_up_to(classes.field, max_norm + 1):
        if not are_coprime(prime, modulus):
            continue
        checked.append(prime.label)
        prime_class = classes.class_of(prime)
        twist = spec.eta(prime) * spec.psi(prime) * ring.from_int(int(prime.norm()) ** (spec.k - 1))
        eigenvalue = hecke_eigenvalue(spec, prime)
        for index in range(classes.h_plus):
            up = classes.multiply(index, prime_class)
            down = classes.multiply(index, classes.inverse(prime_class))
            if not ring.equal(constant[up] + twist * constant[down], eigenvalue * constant[index]):
                logger.debug("constant tuple fails at class %d, prime %s", index, prime.label)
                return ConstantTupleReport(
                    ok=False, checked_primes=checked, witness_class=index, witness_prime=prime.label
                )
    return ConstantTupleReport(ok=True, checked_primes=checked)


def eisenstein_product_basis(
    specs: Sequence[EisensteinSpec], multiplier: EisensteinSpec, classes: NarrowClassData
) -> List[AdelicSeries]:
    """Products E_k(eta_i, psi_i) * E_k'(multiplier), a basis of synthetic higher weight forms."""
    multiplier_series = eisenstein_series(multiplier, classes)
    return [eisenstein_series(spec, classes) * multiplier_series for spec in specs]
