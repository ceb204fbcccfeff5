"""Four-case classification of a fragment against its shadow."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .embedding import (
    MapPair,
    SimplexCertificate,
    Verdict,
    fragment_simplex_embed,
    simplex_embed,
    verify_simplex_embedding,
)
from .errors import ValidationFailed, WitnessVerificationFailed
from .fragment import Strictness, as_fragment, is_tomographic, validate
from .numerics import Tolerance
from .shadow import ShadowResult, quotient_shadow

__all__ = ["Case", "FourCaseReport", "classify_fragment", "MISTAKEN_WARNING"]

MISTAKEN_WARNING = (
    "shadow is not simplex-embeddable but the fragment is: "
    "the apparent nonclassicality is an artifact of missing measurements or preparations"
)
INDETERMINATE_WARNING = (
    "shadow is not simplex-embeddable and the fragment is not tomographic; "
    "the fragment verdict cannot be read off the shadow"
)


class Case(str, enum.Enum):
    TL = "TL"  # shadow embeddable, fragment embeddable
    TR = "TR"  # shadow not embeddable, fragment embeddable
    BL = "BL"  # never emitted
    BR = "BR"  # neither embeddable


@dataclass(frozen=True, eq=False)
class FourCaseReport:
    fragment_tomographic: bool
    shadow_embeddable: bool
    fragment_verdict: Verdict
    case: Optional[Case]
    warning: Optional[str]
    shadow: ShadowResult
    shadow_certificate: SimplexCertificate
    fragment_witness: Optional[MapPair] = None

    def to_dict(self):
        return {
            "fragment_tomographic": self.fragment_tomographic,
            "shadow_embeddable": self.shadow_embeddable,
            "fragment_verdict": self.fragment_verdict.value,
            "case": None if self.case is None else self.case.value,
            "warning": self.warning,
            "shadow_dimension": self.shadow.k,
        }


def _in_simplex_coordinates(f, tol) -> MapPair:
    d = f.state_dim
    if f.effect_dim != d or not tol.close(f.prob_rule, np.eye(d)):
        raise ValidationFailed(
            "ambient-simplicial flag requires states and effects in the same space with B = I"
        )
    maps = MapPair.identity(d)
    rep = verify_simplex_embedding(f, maps, d, tol)
    if not rep.passed:
        raise ValidationFailed(
            "ambient-simplicial flag given but the fragment does not sit inside a simplex", rep
        )
    return maps


def classify_fragment(f, ambient_simplicial=False, tol=None, direct=False) -> FourCaseReport:
    """Place a fragment in the shadow/fragment embeddability table.

    Parameters
    ----------
    ambient_simplicial : bool
        Assert that the fragment is given in the coordinates of a simplicial
        GPT (states in the probability simplex, effects in the unit cube,
        ``B = I``).  The identity inclusion is verified, not trusted.
    direct : bool
        When the shadow says nothing about the fragment, decide the fragment
        itself by the span-coordinate LP instead of reporting it as
        indeterminate.
    """
    f = as_fragment(f)
    tol = Tolerance.coerce(tol)
    validate(f, tol, Strictness.LENIENT).raise_if_failed(f"validation of {f.name}")
    tomo = is_tomographic(f, tol)
    sh = quotient_shadow(f, tol)
    cert = simplex_embed(sh.shadow, tol)

    if cert.embeddable:
        # pull the shadow's witness back along the shadow maps
        w = MapPair(sh.sigma, sh.tau).then(cert.witness_maps)
        rep = verify_simplex_embedding(f, w, cert.dimension, tol)
        if not rep.passed:
            raise WitnessVerificationFailed("composed shadow witness failed on the fragment")
        return FourCaseReport(tomo, True, Verdict.EMBEDDABLE, Case.TL, None, sh, cert, w)

    if tomo:
        return FourCaseReport(tomo, False, Verdict.NOT_EMBEDDABLE, Case.BR, None, sh, cert)
    if ambient_simplicial:
        w = _in_simplex_coordinates(f, tol)
        return FourCaseReport(
            tomo, False, Verdict.EMBEDDABLE, Case.TR, MISTAKEN_WARNING, sh, cert, w
        )
    if direct:
        fc = fragment_simplex_embed(f, tol)
        if fc.embeddable:
            return FourCaseReport(
                tomo, False, Verdict.EMBEDDABLE, Case.TR, MISTAKEN_WARNING, sh, cert,
                fc.witness_maps,
            )
        return FourCaseReport(tomo, False, Verdict.NOT_EMBEDDABLE, Case.BR, None, sh, cert)
    return FourCaseReport(
        tomo, False, Verdict.INDETERMINATE, None, INDETERMINATE_WARNING, sh, cert
    )
