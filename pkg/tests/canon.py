"""Parameter sets shared by the tests."""

from jumpou.model import ModelParams
from jumpou.occupation import OccupationQuery

P_STAR = ModelParams(kappa=1.0, alpha=0.0, mu=0.0, sigma=0.2, lam=0.5, p_up=0.4, eta=3.0, theta_down=2.0)
Q_STAR = OccupationQuery(b=0.0, s=1.0, omega=0.5, theta_T=0.3)

# Driver-only example: kappa and alpha do not enter L_1.
LEVY_EXAMPLE = ModelParams(kappa=1.0, alpha=0.0, mu=0.1, sigma=0.3, lam=1.0, p_up=0.5, eta=2.0, theta_down=3.0)

# A second, less symmetric set for property tests.
SKEWED = ModelParams(kappa=0.7, alpha=0.3, mu=0.15, sigma=0.35, lam=1.2, p_up=0.65, eta=4.0, theta_down=2.5)

P_STAR_DICT = {
    "kappa": 1.0, "alpha": 0.0, "mu": 0.0, "sigma": 0.2, "lambda": 0.5,
    "p_up": 0.4, "eta": 3.0, "theta_down": 2.0,
}
