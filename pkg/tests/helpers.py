"""Shared draw helpers and closed-form oracles for the tests."""
import math

from hybridchsh.chsh import Scenario
from hybridchsh.measure import AtomSetting, Counting, Quadrature
from hybridchsh.model import Imperfections, StateParams


def s_star_closed_form(eta_t: float, eta_d: float) -> float:
    """Independent 1-d reduction of the counting+homodyne maximum.

    With u = eta_t*eta_d, v = (2/pi)*eta_t, and c = cos 2theta, the best
    S over all angles at fixed c is 2*sqrt((u + (1-u)c)^2 + v(1-c^2));
    maximize over the boundary and the single interior stationary point.
    """
    u = eta_t * eta_d
    v = (2.0 / math.pi) * eta_t

    def s_at(c):
        return 2.0 * math.sqrt((u + (1.0 - u) * c) ** 2 + v * (1.0 - c * c))

    candidates = [0.0, 1.0]
    denom = v - (1.0 - u) ** 2
    if denom > 0:
        c_star = u * (1.0 - u) / denom
        if 0.0 <= c_star <= 1.0:
            candidates.append(c_star)
    return max(s_at(c) for c in candidates)


def random_setting(rng) -> AtomSetting:
    return AtomSetting(alpha=rng.uniform(-math.pi, math.pi),
                       varphi=rng.uniform(-math.pi, math.pi),
                       aux_outcome=int(rng.choice([-1, 1])))


def random_optical(rng):
    if rng.random() < 0.5:
        return Counting(eta_d=rng.uniform(0.0, 1.0))
    return Quadrature(zeta=rng.uniform(0.0, 2.0 * math.pi))


def random_scenario(rng, ideal: bool = False) -> Scenario:
    state = StateParams(theta=rng.uniform(0.0, math.pi / 2),
                        phi=rng.uniform(0.0, 2.0 * math.pi))
    if ideal:
        imp = Imperfections()
        bob = (Counting(eta_d=1.0), Quadrature(zeta=rng.uniform(0.0, 2.0 * math.pi)))
    else:
        if rng.random() < 0.5:
            f_s, f_g, f_aux = rng.dirichlet([2.0, 1.0, 1.0])
        else:
            f_s, f_g, f_aux = 1.0, 0.0, 0.0
        imp = Imperfections(eta_t=rng.uniform(0.0, 1.0),
                            f_s=f_s, f_g=f_g, f_aux=f_aux,
                            fidelity=rng.uniform(0.5, 1.0))
        bob = (random_optical(rng), random_optical(rng))
    return Scenario(label="random", state=state, imperfections=imp,
                    alice=(random_setting(rng), random_setting(rng)),
                    bob=bob)
