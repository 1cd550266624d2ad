"""Randomized verification of the stability conditions against eigenvalues.

The stability tests implemented in nistab are necessary *and* sufficient,
so on every random plant/controller pair a decisive verdict must match a
direct Hurwitz test of the closed-loop state matrix.  This script draws
negative-imaginary plants from all structural families (no free body
motion, single/double origin poles, full and partial rank, mixed 1/s and
1/s^2 content) against random integral resonant controllers, and reports
the agreement statistics.

Run:  python demos/montecarlo_check.py [count] [seed]
"""

import sys

import nistab as ns


def main(count=400, seed=2024):
    rep = ns.montecarlo_agreement(count, seed=seed)
    print(f"trials:               {rep.count}")
    print(f"decisive (checked):   {rep.applicable}")
    print(f"boundary (excluded):  {rep.boundary}")
    print(f"inconclusive:         {rep.inconclusive}")
    print(f"precondition failed:  {rep.precondition_failed}")
    print(f"agreement fraction:   {rep.agreement_fraction:.4f}")
    print("\nverdicts by deciding condition / branch:")
    for key in sorted(rep.by_theorem):
        print(f"  {key:<45} {rep.by_theorem[key]:4d}")
    if rep.disagreements:
        print("\nDISAGREEMENTS (these would indicate a bug):")
        for t, fam, out in rep.disagreements:
            print(f"  trial {t} family {fam}: verdict {out}")
    assert rep.agreement_fraction == 1.0


if __name__ == "__main__":
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 400
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 2024
    main(count, seed)
