"""Hand-designed SAT/UNSAT traces for the three shipped specifications.

Four traces per specification: a satisfying and a violating trace for the
FAKE-target form (on fake-predicted videos) and for the REAL-target form
(on real-predicted videos).  Catalog: prototype 0 is REAL, prototype 1 is
FAKE; rows list [real_score, fake_score] per frame.
"""

from __future__ import annotations

from dataclasses import dataclass

from proto_tqtl.formula import Formula
from proto_tqtl.semantics import Verdict
from proto_tqtl.specs import SpecParams, build_phi1, build_phi2, build_phi3
from proto_tqtl.synth import script_trace
from proto_tqtl.trace import Label, PrototypeMeta, Trace

CATALOG = (PrototypeMeta(0, Label.REAL), PrototypeMeta(1, Label.FAKE))


@dataclass(frozen=True)
class SpecCase:
    name: str
    formula: Formula
    trace: Trace
    expected: Verdict


def _trace(name, rows, label):
    return script_trace(rows, name, label, label, CATALOG)


def spec_suite_cases() -> list[SpecCase]:
    fake = SpecParams(target_class=Label.FAKE)
    real = SpecParams(target_class=Label.REAL)
    cases = []

    # --- phi1, FAKE target: a fake prototype's frozen score must dominate all
    # real prototypes at every later in-range frame.
    rows = [[0.9, 0.5] for _ in range(8)]
    rows[3][1] = 0.95  # key frame: fake prototype spikes above every real score
    cases.append(SpecCase("phi1/fake/sat", build_phi1(fake), _trace("p1fs", rows, Label.FAKE), Verdict.SAT))

    rows = [[0.9, 0.5] for _ in range(8)]
    rows[3][1] = 0.95
    rows[7][0] = 0.96  # a real prototype tops every fake frozen score at the last frame
    cases.append(SpecCase("phi1/fake/unsat", build_phi1(fake), _trace("p1fu", rows, Label.FAKE), Verdict.UNSAT))

    # --- phi1, REAL target (mirrored classes)
    rows = [[0.5, 0.4] for _ in range(8)]
    rows[2][0] = 0.95
    cases.append(SpecCase("phi1/real/sat", build_phi1(real), _trace("p1rs", rows, Label.REAL), Verdict.SAT))

    rows = [[0.9, 0.4] for _ in range(8)]
    rows[7][1] = 0.96
    cases.append(SpecCase("phi1/real/unsat", build_phi1(real), _trace("p1ru", rows, Label.REAL), Verdict.UNSAT))

    # --- phi2, FAKE target: real prototypes must stay under 0.4 and not drift
    rows = [[0.2, 0.9] for _ in range(8)]
    cases.append(SpecCase("phi2/fake/sat", build_phi2(fake), _trace("p2fs", rows, Label.FAKE), Verdict.SAT))

    rows = [[0.2, 0.9] for _ in range(8)]
    rows[3][0] = 0.45  # ceiling breach
    cases.append(SpecCase("phi2/fake/unsat", build_phi2(fake), _trace("p2fu", rows, Label.FAKE), Verdict.UNSAT))

    # --- phi2, REAL target: fake prototypes constrained
    rows = [[0.9, 0.1] for _ in range(8)]
    cases.append(SpecCase("phi2/real/sat", build_phi2(real), _trace("p2rs", rows, Label.REAL), Verdict.SAT))

    rows = [[0.9, 0.2] for _ in range(8)]
    for i in range(4, 8):
        rows[i][1] = 0.35  # 0.15 jump two frames later, inside the 5-frame window
    cases.append(SpecCase("phi2/real/unsat", build_phi2(real), _trace("p2ru", rows, Label.REAL), Verdict.UNSAT))

    # --- phi3, FAKE target: ceiling only, drift permitted
    rows = [[0.39 if i % 2 else 0.05, 0.9] for i in range(8)]  # wild drift, bounded by 0.39
    cases.append(SpecCase("phi3/fake/sat", build_phi3(fake), _trace("p3fs", rows, Label.FAKE), Verdict.SAT))

    rows = [[0.2, 0.9] for _ in range(8)]
    rows[5][0] = 0.41
    cases.append(SpecCase("phi3/fake/unsat", build_phi3(fake), _trace("p3fu", rows, Label.FAKE), Verdict.UNSAT))

    # --- phi3, REAL target
    rows = [[0.9, 0.3 if i % 2 else 0.1] for i in range(8)]
    cases.append(SpecCase("phi3/real/sat", build_phi3(real), _trace("p3rs", rows, Label.REAL), Verdict.SAT))

    rows = [[0.9, 0.1] for _ in range(8)]
    rows[0][1] = 0.41
    cases.append(SpecCase("phi3/real/unsat", build_phi3(real), _trace("p3ru", rows, Label.REAL), Verdict.UNSAT))

    return cases
