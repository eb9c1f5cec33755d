from .prng import Mulberry32, seed_prng
from .runner import ReportBundle, run_experiment
from .samples import RunConfig, Sample, generate_samples
from .scrub import scrub_csv
from .subjects import Decision, GateInput

__all__ = [
    "Decision",
    "GateInput",
    "Mulberry32",
    "ReportBundle",
    "RunConfig",
    "Sample",
    "generate_samples",
    "run_experiment",
    "scrub_csv",
    "seed_prng",
]
