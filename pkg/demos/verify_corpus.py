"""Verify every bundled model, exactly and by random evaluation."""

import sys
import time

from superint.corpus import corpus_names, independence_check, load_model, verify

mode = sys.argv[1] if len(sys.argv) > 1 else "exact"
bad = 0
for name in corpus_names():
    m = load_model(name)
    t0 = time.perf_counter()
    outcomes = verify(m, mode, trials=5, seed=0)
    dep = [r[0] for r in independence_check(m).rows if not r[2]]
    failed = [o.integral for o in outcomes if not o.passed]
    bad += len(failed)
    print(f"{name:6s} {len(outcomes):3d} integrals  {time.perf_counter() - t0:5.2f}s"
          + (f"  FAILED {failed}" if failed else "") + (f"  leading order dependent {dep}" if dep else ""))
print("failures:", bad)
