#!/usr/bin/env python3
"""Verify the resonance-phase lower bounds across a sweep of speed ratios.

Writes one CSV per alpha plus a combined summary, mirroring the
`kgzsim resonance` subcommand over the standard alpha set.
"""

import argparse
from pathlib import Path

from kgzsim.export import write_csv
from kgzsim.resonance import compute_params, verify_lemma_bounds, verify_profile_bound

ALPHAS = (0.3, 0.5, 0.8, 1.25, 2.0, 3.0)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/lemma", help="output directory")
    ap.add_argument("--alphas", default=",".join(str(a) for a in ALPHAS))
    args = ap.parse_args()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    rows = []
    all_ok = True
    for alpha in (float(a) for a in args.alphas.split(",")):
        params = compute_params(alpha)
        rep = verify_lemma_bounds(params)
        profile_ok, margin = verify_profile_bound(params)
        rep.write_csv(outdir / f"bounds_alpha_{alpha:g}.csv")
        ok = rep.passed and profile_ok
        all_ok &= ok
        summary = rep.summary()
        rows.append(
            (
                alpha,
                params.c_alpha,
                params.delta_alpha,
                params.k_alpha,
                params.rho,
                summary["min|w1|/|xi|"],
                summary["min|w3|/<xi>"],
                summary["min|w2|/<xi>"],
                summary["min|w4|/<xi>"],
                summary["sign_change"],
                margin,
                ok,
            )
        )
        print(f"alpha={alpha:g}: {'ok' if ok else 'FAILED'} (profile margin {margin:.3e})")
    write_csv(
        outdir / "summary.csv",
        [
            "alpha",
            "c_alpha",
            "delta_alpha",
            "k_alpha",
            "rho",
            "min_w1_over_xi",
            "min_w3_over_bracket",
            "min_w2_over_bracket",
            "min_w4_over_bracket",
            "sign_change",
            "profile_margin",
            "passed",
        ],
        rows,
    )
    return 0 if all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
