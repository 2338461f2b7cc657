import math
import random
from pathlib import Path

from latrel.engine import JointSurvivalOracle
from latrel.lattice import random_semicoherent

MODELS = Path(__file__).resolve().parents[1] / "models"


def load_model_text(name):
    return (MODELS / f"{name}.model").read_text()


class ComonotoneExponentialOracle(JointSurvivalOracle):
    """All lifetimes equal to a single exp(rate) variable."""

    def __init__(self, rate=1.0):
        self.rate = rate

    def survival_all(self, mask, t):
        return math.exp(-self.rate * t) if mask else 1.0

    def failure_all(self, mask, t):
        return 1.0 - math.exp(-self.rate * t) if mask else 1.0


def random_structures(n, count, seed=1234):
    r = random.Random(seed * 1000 + n)
    return [random_semicoherent(n, r) for _ in range(count)]
