"""Junction feasibility rules for mixing quantum neuron designs.

Any producer-to-consumer junction is classified into one of eight paths
by three booleans: the producer's output encoding, whether its output
qubits are entangled, and the consumer's input encoding. Paths 1-4 are
the unentangled half; 5-8 mirror them with entanglement:

    path  out  entangled  in
      1    A      no       A        5    A     yes      A
      2    A      no       P        6    A     yes      P
      3    P      no       A        7    P     yes      A
      4    P      no       P        8    P     yes      P

Five rules decide feasibility:

1. Unentangled outputs (paths 1-4) connect to anything.
2. Entangled amplitudes into an amplitude consumer (path 5) are fine:
   the consumer operates on the joint state directly.
3. Entangled amplitudes into a probability consumer that assumes
   independent inputs (path 6) are infeasible; correlations break the
   per-qubit product picture.
4. Entangled probabilities into an amplitude consumer (path 7) work only
   when the producer reuses its input qubits as outputs, so the register
   itself carries the amplitudes onward.
5. Entangled probabilities into a probability consumer (path 8) work
   when the consumer only uses them as controls without phase kickback
   and/or rotates them around the X axis.

Entanglement is decided statically from the producer's kind, never by
simulating: validation must run before any circuit is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .arch import ArchitectureSpec
from .encoding import EncodingKind

A = EncodingKind.AMPLITUDE
P = EncodingKind.PROBABILITY


class ConsumerOp(Enum):
    CONTROL_ONLY_NO_PHASE_KICKBACK = "control-only-no-phase-kickback"
    RX_ONLY = "rx-only"
    OTHER = "other"


class Feasibility(Enum):
    FEASIBLE = "feasible"
    CONDITIONALLY_FEASIBLE = "conditionally-feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class JunctionProfile:
    out_encoding: EncodingKind
    out_entangled: bool
    reuses_input_qubits: bool
    in_encoding: EncodingKind
    consumer_ops: frozenset
    consumer_requires_independent_inputs: bool

    def __post_init__(self):
        if not self.consumer_ops:
            raise ValueError("consumer_ops must be non-empty")


@dataclass(frozen=True)
class ConnectionVerdict:
    path_id: int
    status: Feasibility
    principle: int
    conditions: tuple[str, ...] = ()
    reason: str | None = None

    @property
    def feasible(self) -> bool:
        return self.status is Feasibility.FEASIBLE


def classify_path(profile: JunctionProfile) -> int:
    """Total map from the 2x2x2 profile cube onto path ids 1..8."""
    base = 1 + 2 * (profile.out_encoding is P) + (profile.in_encoding is P)
    return base + 4 if profile.out_entangled else base


_SAFE_PATH8_OPS = frozenset(
    {ConsumerOp.CONTROL_ONLY_NO_PHASE_KICKBACK, ConsumerOp.RX_ONLY}
)


def check_connection(profile: JunctionProfile) -> ConnectionVerdict:
    path = classify_path(profile)
    if path <= 4:
        return ConnectionVerdict(path, Feasibility.FEASIBLE, principle=1)
    if path == 5:
        return ConnectionVerdict(path, Feasibility.FEASIBLE, principle=2)
    if path == 6:
        if profile.consumer_requires_independent_inputs:
            return ConnectionVerdict(
                path,
                Feasibility.INFEASIBLE,
                principle=3,
                reason="entangled amplitude outputs feed a probability consumer "
                "that assumes independent inputs",
            )
        return ConnectionVerdict(
            path,
            Feasibility.CONDITIONALLY_FEASIBLE,
            principle=3,
            conditions=("consumer tolerates correlated probability inputs",),
        )
    if path == 7:
        if profile.reuses_input_qubits:
            return ConnectionVerdict(path, Feasibility.FEASIBLE, principle=4)
        return ConnectionVerdict(
            path,
            Feasibility.INFEASIBLE,
            principle=4,
            reason="probability outputs live on fresh ancillas, so no register "
            "carries amplitudes into the consumer",
        )
    # path 8
    if profile.consumer_ops <= _SAFE_PATH8_OPS:
        return ConnectionVerdict(path, Feasibility.FEASIBLE, principle=5)
    return ConnectionVerdict(
        path,
        Feasibility.INFEASIBLE,
        principle=5,
        reason="consumer applies operations beyond kickback-free controls "
        "and X-axis rotations to entangled probability qubits",
    )


# ---------------------------------------------------------------------------
# per-kind static profiles
# ---------------------------------------------------------------------------

# (canonical input, natural output, reuses inputs, output entangled,
#  ops applied to the producer's qubits, assumes independent inputs)
_KIND_TRAITS = {
    "v": dict(
        in_enc=A, out_enc=A, reuses=True, entangles=True,
        ops=frozenset({ConsumerOp.OTHER}), indep=False, views=(A, P),
    ),
    "u": dict(
        in_enc=A, out_enc=P, reuses=False, entangles=True,
        ops=frozenset({ConsumerOp.OTHER}), indep=False, views=(P,),
    ),
    "p": dict(
        in_enc=P, out_enc=P, reuses=False, entangles=True,
        ops=frozenset({ConsumerOp.CONTROL_ONLY_NO_PHASE_KICKBACK}), indep=True,
        views=(P,),
    ),
    "n": dict(
        in_enc=P, out_enc=P, reuses=True, entangles=True,
        ops=frozenset({ConsumerOp.RX_ONLY}), indep=True, views=(P,),
    ),
}


@dataclass
class JunctionRecord:
    producer: str
    consumer: str
    path_id: int
    verdict: ConnectionVerdict


@dataclass
class ValidationReport:
    architecture: str
    junctions: list[JunctionRecord] = field(default_factory=list)
    encoding_flags: list[str] = field(default_factory=list)
    mid_circuit_measurements: int = 0

    @property
    def passed(self) -> bool:
        return all(j.verdict.feasible for j in self.junctions)

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "passed": self.passed,
            "mid_circuit_measurements": self.mid_circuit_measurements,
            "encoding_flags": list(self.encoding_flags),
            "junctions": [
                {
                    "producer": j.producer,
                    "consumer": j.consumer,
                    "path": j.path_id,
                    "principle": j.verdict.principle,
                    "status": j.verdict.status.value,
                    "conditions": list(j.verdict.conditions),
                    "reason": j.verdict.reason,
                }
                for j in self.junctions
            ],
        }

    def render_text(self) -> str:
        lines = [
            f"architecture: {self.architecture}",
            f"mid-circuit measurements: {self.mid_circuit_measurements}",
        ]
        for j in self.junctions:
            extra = ""
            if j.verdict.conditions:
                extra = f"  [{'; '.join(j.verdict.conditions)}]"
            if j.verdict.reason:
                extra = f"  ({j.verdict.reason})"
            lines.append(
                f"  {j.producer} -> {j.consumer}: path {j.path_id}, "
                f"principle {j.verdict.principle}, {j.verdict.status.value}{extra}"
            )
        for flag in self.encoding_flags:
            lines.append(f"  goal-2 flag: {flag}")
        lines.append("verdict: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def validate_architecture(arch: ArchitectureSpec) -> ValidationReport:
    """Check every junction of ``arch`` against the five rules.

    Pure bookkeeping over static per-kind traits: nothing is simulated,
    so this is safe to call before any state allocation. The overall
    report passes only if every junction is feasible; the circuits built
    later measure exclusively at the very end, which the report records
    as a zero mid-circuit measurement count.
    """
    arch.validate_shape()
    report = ValidationReport(architecture=arch.name)

    # The encoded input acts as a pseudo-producer: fresh, unentangled, and
    # preparable under either encoding (the data stage supports both).
    prev_label = "input"
    prev = dict(out_enc=A, reuses=False, entangles=False, views=(A, P))

    for i, layer in enumerate(arch.layers):
        traits = _KIND_TRAITS[layer.kind]
        label = f"{layer.kind}[{i}]"
        wanted = traits["in_enc"]
        if wanted in prev["views"]:
            out_enc = wanted
        else:
            out_enc = prev["out_enc"]
            report.encoding_flags.append(
                f"{label} canonically consumes {wanted.value} encoding but "
                f"receives {out_enc.value} from {prev_label}"
            )
        profile = JunctionProfile(
            out_encoding=out_enc,
            out_entangled=prev["entangles"],
            reuses_input_qubits=prev["reuses"],
            in_encoding=wanted,
            consumer_ops=traits["ops"],
            consumer_requires_independent_inputs=traits["indep"],
        )
        verdict = check_connection(profile)
        report.junctions.append(
            JunctionRecord(prev_label, label, verdict.path_id, verdict)
        )
        prev_label = label
        prev = dict(
            out_enc=traits["out_enc"],
            reuses=traits["reuses"],
            entangles=traits["entangles"],
            views=traits["views"],
        )
    return report
