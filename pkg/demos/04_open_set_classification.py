"""Open-set diagnosis: rejecting every known class is an answer too.

A tuned one-class model per fault class turns distinguishability into a
keep/reject decision.  The classifier then reports one of three verdicts:
``no_fault`` when fault-free behavior explains the batch, ``hypotheses``
with the surviving classes otherwise, and ``unknown`` when every known
class is rejected.  To show the third path doing real work we train with
one fault class deliberately held out and then feed it to the classifier.
"""

from collections import Counter

import numpy as np

from kldiag import (
    SyntheticBenchConfig,
    Verdict,
    classify_stream,
    corpus_pdfs,
    generate_bench,
    split,
    tune,
)

config = SyntheticBenchConfig(
    n=2,
    signatures={"f1": [1.0, 0.0], "f2": [0.3, 1.0]},
    magnitudes={"f1": [5.0, 10.0, 20.0], "f2": [5.0, 10.0, 20.0]},
    noise_cov=(0.01**2) * np.array([[1.0, 0.2], [0.2, 1.0]]),
    samples_per_scenario=2200,
    nf_scenarios=4,
    onset=200,
    seed=9,
)
by_class = corpus_pdfs(generate_bench(config), batch_size=100)

novel = by_class.pop("f2")  # the classifier will never train on f2
registry, validation = split(by_class, train_fraction=0.67, seed=0)
models = {label: tune(mode, alpha=0.05) for label, mode in registry.modes.items()}
for label, model in sorted(models.items()):
    print(f"tuned {label}: {len(model.mode)} members, threshold {model.threshold:.4f}")

def verdict_table(title, pdfs):
    outputs = classify_stream(pdfs, models)
    counts = Counter(out.verdict for out in outputs)
    total = len(outputs)
    print(f"\n{title} ({total} batches):")
    for verdict in Verdict:
        print(f"  {verdict.value:<10} {counts.get(verdict, 0) / total:6.1%}")
    return outputs

verdict_table("fault-free validation batches", validation["NF"])
verdict_table("known-fault validation batches (f1)", validation["f1"])
outputs = verdict_table("batches from the held-out class f2", novel)

# For the novel class, 'unknown' is exactly right: f2 looks nothing like
# fault-free behavior, and not enough like f1 either.  A closed-set
# classifier would have been forced to mislabel every one of these.
example = next(
    out for out in outputs if out.verdict is Verdict.UNKNOWN
)
print("\none rejected batch in detail:")
for label, (score, threshold) in sorted(example.scores.items()):
    print(f"  vs {label:<3}  separation {score:8.3f}  threshold {threshold:.3f}  -> rejected")
