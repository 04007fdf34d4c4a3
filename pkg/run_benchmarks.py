"""Build the packaged long-run oracle caches, cheapest target first."""
import time

from superchains.targets import get_target
from superchains.targets.benchmarks import compute_benchmark, save_benchmark

OUT = "src/superchains/targets/data/benchmarks"

for name in ["eight_schools", "german_credit", "pharmacokinetics", "item_response"]:
    t0 = time.time()
    print(f"[{time.strftime('%H:%M:%S')}] {name}: start", flush=True)
    target = get_target(name)
    last = [0.0]

    def progress(done, total):
        if time.time() - last[0] > 60:
            last[0] = time.time()
            print(f"[{time.strftime('%H:%M:%S')}] {name}: {done}/{total} draws", flush=True)

    moments = compute_benchmark(target, progress=progress)
    path = save_benchmark(name, moments, OUT)
    cfg = moments.config
    print(
        f"[{time.strftime('%H:%M:%S')}] {name}: done in {(time.time()-t0)/60:.1f} min -> {path}\n"
        f"    accept={cfg['accept_rate']:.3f} min_ess_total={cfg['min_ess_total']:.0f} "
        f"median_ess_total={cfg['median_ess_total']:.0f}",
        flush=True,
    )
print("all benchmarks complete", flush=True)
