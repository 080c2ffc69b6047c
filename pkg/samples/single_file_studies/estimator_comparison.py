"""Compare the global label-distribution estimators on target validation scenes."""

from pathlib import Path

from curda.config import parse_config
from curda.evaluation import chi2_report
from curda.experiment import all_estimators, load_or_generate_benchmark

config = parse_config(Path("samples/configs/quick.cfg"))
benchmark = load_or_generate_benchmark(config, Path(config.out) / "cache")
val = benchmark.target_val

for row in chi2_report(all_estimators(config, benchmark), val.images, val.masks, val.num_classes):
    print(f"{row.estimator:<8} chi2 {row.mean:.4f} +/- {row.std:.4f}")
