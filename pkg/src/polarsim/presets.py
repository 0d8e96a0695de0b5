"""Named decoder arms matching the evaluated configurations.

Preset names follow a small grammar, e.g. scl-16, be-scl8-t2, rpe-scl8-t10,
pe-scl8-sc-t2, gpscl8-s2, ida-be-gpscl8, be-gpscl8-s2-quant.  The
perturbation power and list-sizing thresholds are resolved later against
the code parameters (n, rate).
"""

import re
from dataclasses import dataclass, replace

CANONICAL = [
    "scl-8", "scl-16", "scl-32",
    "rpe-scl8-t10", "pe-scl8-t2", "pe-scl8-sc-t2",
    "be-scl8-t2", "be-scl4-t2",
    "gpscl8-s2", "be-gpscl8-s1", "be-gpscl8-s2", "ida-be-gpscl8",
    "scl-8-quant", "be-gpscl8-s2-quant", "ida-be-gpscl8-quant",
]

_PATTERN = re.compile(
    r"^(?:(ida)-)?(?:(rpe|pe|be)-)?(scl|gpscl)-?(\d+)"
    r"(?:-(sc))?(?:-s(\d+))?(?:-t(\d+))?(?:-(quant))?$")


@dataclass(frozen=True)
class ArmConfig:
    name: str
    kind: str                 # scl | gpscl
    L: int
    S: int = 2
    scheme: str = None        # rpe | pe | be | None
    attempts: int = 1
    second: str = "same"      # same | sc
    ida: str = None           # None | first | both
    quantized: bool = False
    spc_variant: str = "exact"
    pm_mode: str = "approx"
    sigma_p: float = None     # None -> resolve from the power table

    @property
    def split_crc(self):
        return self.kind == "gpscl"


def sigma_p_for(rate):
    """Perturbation power: 0.25 at rate 0.25, 0.10 at rates 0.50 and 0.75."""
    return 0.25 if rate <= 0.375 else 0.10


def preset(name):
    """Look up or parse an arm description; unknown names list the options."""
    m = _PATTERN.match(name)
    if not m:
        raise KeyError("unknown preset %r; known presets: %s (grammar: "
                       "[ida-][rpe|pe|be-](scl|gpscl)<L>[-sc][-s<S>][-t<T>]"
                       "[-quant])" % (name, ", ".join(CANONICAL)))
    ida_flag, scheme, kind, L, sc, S, T, quant = m.groups()
    L = int(L)
    attempts = int(T) if T else (10 if scheme == "rpe" else
                                 2 if scheme else 1)
    if scheme is None and (ida_flag or sc):
        raise KeyError("preset %r combines retry options with no scheme"
                       % (name,))
    return ArmConfig(
        name=name, kind=kind, L=L,
        S=int(S) if S else 2,
        scheme=scheme, attempts=attempts,
        second="sc" if sc else "same",
        ida="first" if ida_flag else None,
        quantized=bool(quant))


def resolve_arm(arm, rate):
    """Fill in parameters that depend on the code: the perturbation power."""
    if arm.scheme is not None and arm.sigma_p is None:
        return replace(arm, sigma_p=sigma_p_for(rate))
    return arm
