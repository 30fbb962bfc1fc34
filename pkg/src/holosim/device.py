"""Device description: transmon parameters and the coupling graph.

Absolute transmon frequencies are never stored.  Every simulation runs in a
rotating frame where only the detuning of each target from its auxiliary
reference and the anharmonicities enter, so the configuration format carries
exactly those numbers.  Config values are ordinary frequencies in MHz and are
converted to angular frequencies (rad/s) on load.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

TWO_PI = 6.283185307179586

ROLE_TARGET = "target"
ROLE_AUXILIARY = "auxiliary"


class ConfigError(ValueError):
    """Malformed or inconsistent device configuration."""


@dataclass(frozen=True)
class TransmonSpec:
    """One transmon.

    Parameters
    ----------
    label : str
        Unique name in the lattice.
    role : str
        "target" or "auxiliary".
    anharmonicity : float
        Difference between the 0-1 and 1-2 transition frequencies, rad/s, > 0.
    detuning : float
        Auxiliary-minus-this-qubit transition frequency, rad/s.  Auxiliary
        qubits carry 0.
    levels : int
        Retained oscillator levels, default 3 (the third level is the
        dominant leakage channel; 2 and 4 are supported for model checks).
    """

    label: str
    role: str
    anharmonicity: float
    detuning: float = 0.0
    levels: int = 3


@dataclass(frozen=True)
class LatticeModel:
    """Validated set of transmons plus the target-auxiliary coupling graph."""

    qubits: tuple[TransmonSpec, ...]
    couplings: tuple[tuple[str, str, float], ...] = field(default_factory=tuple)

    def qubit(self, label: str) -> TransmonSpec:
        for q in self.qubits:
            if q.label == label:
                return q
        raise ConfigError(f"unknown qubit label {label!r}")

    def labels(self) -> tuple[str, ...]:
        return tuple(q.label for q in self.qubits)

    def index(self, label: str) -> int:
        for i, q in enumerate(self.qubits):
            if q.label == label:
                return i
        raise ConfigError(f"unknown qubit label {label!r}")

    def dims(self) -> tuple[int, ...]:
        return tuple(q.levels for q in self.qubits)

    def coupling(self, a: str, b: str) -> float:
        for qa, qb, g in self.couplings:
            if {qa, qb} == {a, b}:
                return g
        raise ConfigError(f"no coupling between {a!r} and {b!r}")


def hilbert_dim(model: LatticeModel) -> int:
    """Product of per-qubit level counts."""
    dim = 1
    for q in model.qubits:
        dim *= q.levels
    return dim


def validate_lattice(model: LatticeModel) -> LatticeModel:
    labels = [q.label for q in model.qubits]
    for label in labels:
        if labels.count(label) > 1:
            raise ConfigError(f"duplicate qubit label {label!r}")
    for q in model.qubits:
        if q.role not in (ROLE_TARGET, ROLE_AUXILIARY):
            raise ConfigError(f"qubit {q.label!r}: role must be 'target' or 'auxiliary', got {q.role!r}")
        if q.anharmonicity <= 0:
            raise ConfigError(f"qubit {q.label!r}: anharmonicity must be positive")
        if q.levels < 2:
            raise ConfigError(f"qubit {q.label!r}: needs at least 2 levels")
        if q.role == ROLE_AUXILIARY and q.detuning != 0.0:
            raise ConfigError(f"auxiliary qubit {q.label!r} must carry zero detuning")
    for a, b, g in model.couplings:
        qa, qb = model.qubit(a), model.qubit(b)
        if {qa.role, qb.role} != {ROLE_TARGET, ROLE_AUXILIARY}:
            raise ConfigError(f"coupling {a!r}-{b!r} must join a target to an auxiliary")
        if g <= 0:
            raise ConfigError(f"coupling {a!r}-{b!r}: strength must be positive")
        target = qa if qa.role == ROLE_TARGET else qb
        if target.detuning <= 0:
            raise ConfigError(
                f"target qubit {target.label!r} is coupled to an auxiliary and must carry a positive detuning"
            )
    return model


def load_lattice(config_text: str) -> LatticeModel:
    """Parse and validate a lattice from configuration text.

    The format is TOML with one ``[qubit.<label>]`` table per transmon
    (fields ``role``, ``anharmonicity_MHz``, ``detuning_MHz``, ``levels``)
    and a ``[[coupling]]`` array of tables (fields ``a``, ``b``, ``g_MHz``).
    """
    try:
        data = tomllib.loads(config_text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    qubits = []
    for label, fields in data.get("qubit", {}).items():
        if not isinstance(fields, dict):
            raise ConfigError(f"qubit {label!r}: expected a table of fields")
        unknown = set(fields) - {"role", "anharmonicity_MHz", "detuning_MHz", "levels"}
        if unknown:
            raise ConfigError(f"qubit {label!r}: unknown field(s) {sorted(unknown)}")
        try:
            role = fields["role"]
            alpha_mhz = fields["anharmonicity_MHz"]
        except KeyError as exc:
            raise ConfigError(f"qubit {label!r}: missing field {exc.args[0]!r}") from exc
        qubits.append(
            TransmonSpec(
                label=label,
                role=role,
                anharmonicity=TWO_PI * 1e6 * float(alpha_mhz),
                detuning=TWO_PI * 1e6 * float(fields.get("detuning_MHz", 0.0)),
                levels=int(fields.get("levels", 3)),
            )
        )

    couplings = []
    for i, entry in enumerate(data.get("coupling", [])):
        unknown = set(entry) - {"a", "b", "g_MHz"}
        if unknown:
            raise ConfigError(f"coupling #{i}: unknown field(s) {sorted(unknown)}")
        try:
            couplings.append((entry["a"], entry["b"], TWO_PI * 1e6 * float(entry["g_MHz"])))
        except KeyError as exc:
            raise ConfigError(f"coupling #{i}: missing field {exc.args[0]!r}") from exc

    model = LatticeModel(qubits=tuple(qubits), couplings=tuple(couplings))
    for a, b, _ in model.couplings:
        model.qubit(a)
        model.qubit(b)
    return validate_lattice(model)


def serialize_lattice(model: LatticeModel) -> str:
    """Emit configuration text that ``load_lattice`` round-trips exactly."""
    lines = []
    for q in model.qubits:
        lines.append(f"[qubit.{q.label}]")
        lines.append(f'role = "{q.role}"')
        lines.append(f"anharmonicity_MHz = {q.anharmonicity / (TWO_PI * 1e6)!r}")
        lines.append(f"detuning_MHz = {q.detuning / (TWO_PI * 1e6)!r}")
        lines.append(f"levels = {q.levels}")
        lines.append("")
    for a, b, g in model.couplings:
        lines.append("[[coupling]]")
        lines.append(f'a = "{a}"')
        lines.append(f'b = "{b}"')
        lines.append(f"g_MHz = {g / (TWO_PI * 1e6)!r}")
        lines.append("")
    return "\n".join(lines)


def subsystem(model: LatticeModel, labels: list[str] | tuple[str, ...]) -> LatticeModel:
    """Induced sub-lattice on ``labels``, preserving the given qubit order.

    The order fixes the tensor-factor order of every matrix built from the
    returned model.  The induced coupling graph must be connected, since a
    disconnected selection cannot host a mediated gate.
    """
    chosen = tuple(model.qubit(label) for label in labels)
    keep = set(labels)
    if len(keep) != len(labels):
        raise ConfigError("duplicate label in subsystem selection")
    edges = tuple((a, b, g) for a, b, g in model.couplings if a in keep and b in keep)

    reached = {labels[0]}
    frontier = [labels[0]]
    while frontier:
        node = frontier.pop()
        for a, b, _ in edges:
            for other in ((b if a == node else None), (a if b == node else None)):
                if other is not None and other not in reached:
                    reached.add(other)
                    frontier.append(other)
    if reached != keep:
        raise ConfigError(f"subsystem {list(labels)} is not connected by couplings")
    return LatticeModel(qubits=chosen, couplings=edges)


def with_levels(model: LatticeModel, levels: int) -> LatticeModel:
    """Copy of the model with every qubit truncated to ``levels`` levels."""
    return LatticeModel(
        qubits=tuple(replace(q, levels=levels) for q in model.qubits),
        couplings=model.couplings,
    )


def computational_indices(model: LatticeModel) -> list[int]:
    """Flat indices of states with every target in {0, 1} and every auxiliary in 0."""
    dims = model.dims()
    ranges = [range(2) if q.role == ROLE_TARGET else range(1) for q in model.qubits]

    def walk(i: int, prefix: int) -> list[int]:
        if i == len(dims):
            return [prefix]
        out = []
        for occ in ranges[i]:
            out.extend(walk(i + 1, prefix * dims[i] + occ))
        return out

    return walk(0, 0)
