"""Distributed machine model: nodes, channels, shared-control protocols.

A network of small machines holds one global sparse state.  Locality is
enforced by an ownership map: any gate whose operand qubits span two nodes
is a hard error.  The only cross-node state changes are

* pair establishment: two channel qubits are driven into a Bell state,
  modeling one physical qubit exchange, and
* classical messages: measurement bits accounted per direction.

On top of the pair the two half-protocols work:

* entangle: CNOT from the control onto the local pair half, measure it,
  send the bit, conditionally X the remote half.  The control and the
  remote half now form a shared-control state a|00> + b|11>; the measured
  channel qubit is reset and immediately reusable.
* disentangle: H and measure the remote half, send the bit back,
  conditionally Z the control.  The control is restored exactly.

Everything else (remote CNOT, remotely controlled circuit blocks,
teleportation) is a composition of these two and is billed exactly one
pair and two classical bits per shared control qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import gates
from .circuit import Circuit, Instruction
from .qstate import Control, QuantumState, RandomSource

_PURE_TOL = 1e-9


class NetworkError(Exception):
    """Protocol misuse: locality violations, exhausted channels, capacity."""


@dataclass(frozen=True)
class NodeSpec:
    """A machine with ``register_capacity`` total qubits, of which
    ``channel_qubits`` are reserved for pair halves."""

    node_id: str
    register_capacity: int
    channel_qubits: int = 2

    def __post_init__(self):
        if self.register_capacity < 1:
            raise ValueError("capacity must be positive")
        if not 0 <= self.channel_qubits <= self.register_capacity:
            raise ValueError("channel qubits exceed capacity")


@dataclass
class Topology:
    """Node roster plus quantum/classical link sets (complete by default)."""

    nodes: list[NodeSpec]
    quantum_links: set[frozenset[str]] | None = None
    classical_links: set[frozenset[str]] | None = None

    def __post_init__(self):
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")

    def linked(self, kind: str, a: str, b: str) -> bool:
        links = (self.quantum_links if kind == "quantum"
                 else self.classical_links)
        return links is None or frozenset((a, b)) in links


@dataclass
class ResourceLedger:
    """Monotonic communication counters."""

    ebits_consumed: int = 0
    cbits_sent: dict[tuple[str, str], int] = field(default_factory=dict)
    teleports: int = 0
    qubit_transmissions: int = 0
    pairs_established: int = 0

    def send_cbit(self, src: str, dst: str):
        key = (src, dst)
        self.cbits_sent[key] = self.cbits_sent.get(key, 0) + 1

    def total_cbits(self) -> int:
        return sum(self.cbits_sent.values())

    def copy(self) -> "ResourceLedger":
        return ResourceLedger(self.ebits_consumed, dict(self.cbits_sent),
                              self.teleports, self.qubit_transmissions,
                              self.pairs_established)

    def merge(self, other: "ResourceLedger"):
        self.ebits_consumed += other.ebits_consumed
        for key, count in other.cbits_sent.items():
            self.cbits_sent[key] = self.cbits_sent.get(key, 0) + count
        self.teleports += other.teleports
        self.qubit_transmissions += other.qubit_transmissions
        self.pairs_established += other.pairs_established

    def as_dict(self) -> dict:
        return {
            "ebits": self.ebits_consumed,
            "cbits": {f"{a}->{b}": n
                      for (a, b), n in sorted(self.cbits_sent.items())},
            "cbits_total": self.total_cbits(),
            "teleports": self.teleports,
            "qubit_transmissions": self.qubit_transmissions,
            "pairs_established": self.pairs_established,
        }


@dataclass
class EprPair:
    qubit_a: int
    qubit_b: int
    node_a: str
    node_b: str
    consumed: bool = False


@dataclass
class CatState:
    """A control qubit shared with a mirror on another node."""

    control: int
    mirror: int
    node_control: str
    node_mirror: str
    live: bool = True


@dataclass(frozen=True)
class SessionRecord:
    """One remotely controlled block: the unit non-local ops are counted
    in."""

    block: str | None
    node: str
    remote_controls: tuple[int, ...]
    gates: int


@dataclass(frozen=True)
class TeleportRecord:
    src_node: str
    dst_node: str
    label: str


class _NodeRuntime:
    def __init__(self, spec: NodeSpec, first_id: int):
        self.spec = spec
        data = spec.register_capacity - spec.channel_qubits
        self.data_slots = list(range(first_id, first_id + data))
        self.channel_slots = list(range(first_id + data,
                                        first_id + spec.register_capacity))
        self.allocated: set[int] = set()
        self.busy_channels: set[int] = set()

    def live_count(self) -> int:
        return len(self.allocated) + len(self.busy_channels)


class Network:
    """Global state plus per-node bookkeeping and the protocol suite.

    Protocol steps are serialized: messages arrive instantly and in order,
    and the ledger rather than latency is the cost model.  All protocol
    measurements draw from the one seeded source, so runs replay exactly.
    """

    def __init__(self, topology: Topology, rng: RandomSource,
                 prune_epsilon: float = 1e-12):
        self.topology = topology
        self.rng = rng
        self.ledger = ResourceLedger()
        self.nodes: dict[str, _NodeRuntime] = {}
        self.owner: dict[int, str] = {}
        next_id = 0
        for spec in topology.nodes:
            runtime = _NodeRuntime(spec, next_id)
            self.nodes[spec.node_id] = runtime
            for q in runtime.data_slots + runtime.channel_slots:
                self.owner[q] = spec.node_id
            next_id += spec.register_capacity
        self.state = QuantumState(max(1, next_id), prune_epsilon)
        self.sessions: list[SessionRecord] = []
        self.teleport_log: list[TeleportRecord] = []
        self.max_live: dict[str, int] = {n: 0 for n in self.nodes}
        self.max_support = 0

    # -- allocation ------------------------------------------------------

    def allocate_data(self, node_id: str, count: int) -> list[int]:
        """Claim ``count`` free data slots on a node."""
        rt = self._node(node_id)
        free = [q for q in rt.data_slots if q not in rt.allocated]
        if len(free) < count:
            raise NetworkError(f"node {node_id} has no free register slot")
        taken = free[:count]
        rt.allocated.update(taken)
        self._track(node_id)
        return taken

    def release_data(self, node_id: str, qubit: int):
        self._node(node_id).allocated.discard(qubit)

    def node_of(self, qubit: int) -> str:
        try:
            return self.owner[qubit]
        except KeyError:
            raise NetworkError(f"qubit {qubit} belongs to no node") from None

    def live_count(self, node_id: str) -> int:
        return self._node(node_id).live_count()

    # -- local gate application -----------------------------------------

    def apply_local(self, node_id: str, kind, targets: Sequence[int],
                    controls: Iterable[Control] = ()):
        """Apply a gate whose every qubit lives on ``node_id``."""
        for q in (*targets, *(q for q, _ in controls)):
            if self.node_of(q) != node_id:
                raise NetworkError(
                    f"gate spans nodes: qubit {q} is on {self.node_of(q)}, "
                    f"not {node_id}")
        self.state.apply_gate(kind, targets, controls)
        self.max_support = max(self.max_support, self.state.support_size())

    def measure_local(self, qubit: int) -> int:
        outcome = self.state.measure(qubit, self.rng)
        self.max_support = max(self.max_support, self.state.support_size())
        return outcome

    # -- pair establishment and the channel pool -------------------------

    def establish_epr(self, node_a: str, node_b: str) -> EprPair:
        """Drive one free channel qubit on each node into a Bell pair.

        Costs one physical qubit transmission; both channel qubits stay
        busy until the pair is consumed.
        """
        if node_a == node_b:
            raise NetworkError("a pair needs two distinct nodes")
        if not self.topology.linked("quantum", node_a, node_b):
            raise NetworkError(f"no quantum link {node_a}<->{node_b}")
        qa = self._free_channel(node_a)
        qb = self._free_channel(node_b)
        # local H then an exchange-mediated CNOT; this is the one place a
        # cross-node interaction is allowed, and it is billed below
        self.state.apply_gate(gates.H, [qa])
        self.state.apply_gate(gates.X, [qb], [(qa, True)])
        self.nodes[node_a].busy_channels.add(qa)
        self.nodes[node_b].busy_channels.add(qb)
        self._track(node_a)
        self._track(node_b)
        self.ledger.qubit_transmissions += 1
        self.ledger.pairs_established += 1
        return EprPair(qa, qb, node_a, node_b)

    def reset_channels(self, node_id: str):
        """Return every channel qubit to |0>.

        Errors out if a channel qubit is still correlated with live data,
        i.e. its marginal is not an exact |0> or |1>.
        """
        rt = self._node(node_id)
        for q in rt.channel_slots:
            p_one = self.state.prob_one(q)
            if _PURE_TOL < p_one < 1.0 - _PURE_TOL:
                raise NetworkError(
                    f"channel qubit {q} on {node_id} is still entangled")
            if p_one >= 1.0 - _PURE_TOL:
                self.state.apply_gate(gates.X, [q])
            rt.busy_channels.discard(q)

    # -- shared-control protocols ----------------------------------------

    def cat_entangle(self, control: int, pair: EprPair) -> CatState:
        """Share ``control`` with the pair's remote node.

        One local measurement, one classical bit toward the mirror, one
        pair consumed.  The local pair half is reset and freed here.
        """
        if pair.consumed:
            raise NetworkError("pair already consumed")
        node_c = self.node_of(control)
        if node_c != pair.node_a:
            raise NetworkError("control is not on the pair's first node")
        self._check_classical(pair.node_a, pair.node_b)
        self.apply_local(node_c, gates.X, [pair.qubit_a],
                         [(control, True)])
        m = self.measure_local(pair.qubit_a)
        self.ledger.send_cbit(pair.node_a, pair.node_b)
        if m:
            self.apply_local(pair.node_b, gates.X, [pair.qubit_b])
            # reset the measured channel qubit with the same bit
            self.apply_local(pair.node_a, gates.X, [pair.qubit_a])
        pair.consumed = True
        self.ledger.ebits_consumed += 1
        self.nodes[pair.node_a].busy_channels.discard(pair.qubit_a)
        return CatState(control, pair.qubit_b, pair.node_a, pair.node_b)

    def cat_disentangle(self, cat: CatState):
        """Collapse the mirror and restore the control qubit exactly.

        One measurement on the mirror node, one classical bit back, a
        conditional Z on the control; the mirror channel qubit is freed.
        """
        if not cat.live:
            raise NetworkError("shared control already released")
        self.apply_local(cat.node_mirror, gates.H, [cat.mirror])
        m = self.measure_local(cat.mirror)
        self._check_classical(cat.node_mirror, cat.node_control)
        self.ledger.send_cbit(cat.node_mirror, cat.node_control)
        if m:
            self.apply_local(cat.node_control, gates.Z, [cat.control])
            self.apply_local(cat.node_mirror, gates.X, [cat.mirror])
        cat.live = False
        self.nodes[cat.node_mirror].busy_channels.discard(cat.mirror)

    def run_session(self, node_id: str, instructions: Sequence[Instruction],
                    *, block: str | None = None) -> SessionRecord | None:
        """Execute a block of gates on one node, sharing every remote
        control for the whole block.

        Controls are deduplicated: each remote control qubit costs one
        pair and two classical bits no matter how many gates use it.
        At most 3 remote controls are ever distributed at once.
        """
        remote: list[int] = []
        for inst in instructions:
            for q, _pol in inst.controls:
                if self.node_of(q) != node_id and q not in remote:
                    remote.append(q)
        if len(remote) > 3:
            raise NetworkError(
                f"session needs {len(remote)} remote controls (max 3)")
        cats: list[CatState] = []
        mirror: dict[int, int] = {}
        for ctrl in remote:
            pair = self.establish_epr(self.node_of(ctrl), node_id)
            cat = self.cat_entangle(ctrl, pair)
            cats.append(cat)
            mirror[ctrl] = cat.mirror
        gate_count = 0
        for inst in instructions:
            if inst.classical_constant == 0:
                continue
            controls = tuple((mirror.get(q, q), pol)
                             for q, pol in inst.controls)
            self.apply_local(node_id, inst.kind, inst.targets, controls)
            gate_count += 1
        for cat in reversed(cats):
            self.cat_disentangle(cat)
        if not remote:
            return None
        record = SessionRecord(block, node_id, tuple(remote), gate_count)
        self.sessions.append(record)
        return record

    def nonlocal_cnot(self, control: int, target: int):
        """CNOT with control and target on different nodes: exactly one
        pair and one classical bit each way."""
        node_t = self.node_of(target)
        if self.node_of(control) == node_t:
            raise NetworkError("control and target share a node; use a "
                               "local gate")
        inst = Instruction(gates.X, (target,), ((control, True),))
        self.run_session(node_t, [inst], block="nonlocal-cnot")

    def nonlocal_controlled_circuit(self, control: int, body: Circuit, *,
                                    block: str | None = None):
        """Run ``control``-conditioned ``body`` on the body's node.

        The body must be measurement-free and local to one node; the
        shared control is reused across all its gates, so the cost is one
        pair and two classical bits regardless of body size.
        """
        nodes = {self.node_of(q) for q in body.used_qubits()}
        if len(nodes) != 1:
            raise NetworkError(f"body spans nodes {sorted(nodes)}")
        node_id = nodes.pop()
        insts = []
        for inst in body.instructions:
            if not inst.is_gate() or inst.condition:
                raise NetworkError("controlled body must be measurement-free")
            insts.append(Instruction(
                inst.kind, inst.targets, inst.controls + ((control, True),),
                classical_constant=inst.classical_constant))
        self.run_session(node_id, insts, block=block or "nonlocal-block")

    def teleport(self, qubit: int, dest_node: str,
                 dest_slot: int | None = None, *, label: str = "") -> int:
        """Move a qubit state to another node.

        Entangle the qubit with a fresh pair, measure it out in the X
        basis, fix up the remote half (two classical bits forward), then
        swap the state from the channel into the destination register
        slot.  The source slot ends in |0>.
        """
        src_node = self.node_of(qubit)
        if src_node == dest_node:
            raise NetworkError("teleport needs two distinct nodes")
        rt = self.nodes[dest_node]
        if dest_slot is None:
            dest_slot = self.allocate_data(dest_node, 1)[0]
            self.release_data(src_node, qubit)
        else:
            if dest_slot not in rt.allocated:
                raise NetworkError(f"destination slot {dest_slot} not held "
                                   f"by {dest_node}")
        if self.state.prob_one(dest_slot) > _PURE_TOL:
            raise NetworkError(f"destination slot {dest_slot} is not |0>")
        pair = self.establish_epr(src_node, dest_node)
        cat = self.cat_entangle(qubit, pair)
        # transfer instead of restore: measure the source in the X basis
        self.apply_local(src_node, gates.H, [qubit])
        m = self.measure_local(qubit)
        self.ledger.send_cbit(src_node, dest_node)
        if m:
            self.apply_local(dest_node, gates.Z, [cat.mirror])
            self.apply_local(src_node, gates.X, [qubit])
        cat.live = False
        # park the state in the register and free the channel qubit
        self.apply_local(dest_node, gates.SWAP, [cat.mirror, dest_slot])
        rt.busy_channels.discard(cat.mirror)
        self.ledger.teleports += 1
        self.teleport_log.append(TeleportRecord(src_node, dest_node, label))
        self._track(dest_node)
        return dest_slot

    def move(self, src: int, dst: int, *, label: str = ""):
        """Relocate a state into a |0> slot: a local swap on one node, a
        teleport across nodes."""
        src_node, dst_node = self.node_of(src), self.node_of(dst)
        if src_node == dst_node:
            self.apply_local(src_node, gates.SWAP, [src, dst])
        else:
            self.teleport(src, dst_node, dst, label=label)

    # -- helpers ----------------------------------------------------------

    def _node(self, node_id: str) -> _NodeRuntime:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NetworkError(f"unknown node {node_id}") from None

    def _free_channel(self, node_id: str) -> int:
        rt = self._node(node_id)
        for q in rt.channel_slots:
            if q not in rt.busy_channels:
                return q
        raise NetworkError(f"no free channel qubit on {node_id}")

    def _check_classical(self, a: str, b: str):
        if not self.topology.linked("classical", a, b):
            raise NetworkError(f"no classical link {a}<->{b}")

    def _track(self, node_id: str):
        rt = self._node(node_id)
        live = rt.live_count()
        if live > rt.spec.register_capacity:
            raise NetworkError(
                f"node {node_id} over capacity: {live} live qubits")
        if live > self.max_live[node_id]:
            self.max_live[node_id] = live


def execute_distributed(network: Network, circ: Circuit
                        ) -> tuple[list[int], dict[int, int]]:
    """Run a circuit on the network, turning remote controls into shared
    controls and MOVE directives into teleports.

    Gate operands must be co-located on one node (spanning operands are a
    hard error); instructions tagged with the same ``block`` run as one
    session so the shared controls are established once per block.
    Returns the measurement transcript and the classical-bit store.
    """
    bits: dict[int, int] = {}
    transcript: list[int] = []
    insts = circ.instructions
    i = 0
    while i < len(insts):
        inst = insts[i]
        name = inst.kind.name
        if name == "MOVE":
            network.move(inst.targets[0], inst.targets[1], label=inst.label)
            i += 1
            continue
        if name == "MEASURE":
            outcome = network.measure_local(inst.targets[0])
            bits[inst.classical_out] = outcome
            transcript.append(outcome)
            i += 1
            continue
        if name == "RESET":
            outcome = network.measure_local(inst.targets[0])
            if outcome:
                node = network.node_of(inst.targets[0])
                network.apply_local(node, gates.X, inst.targets)
            i += 1
            continue
        if inst.condition:
            raise NetworkError(
                "classically conditioned gates are protocol-internal and "
                "cannot appear in a distributed program")
        node = _operand_node(network, inst)
        group = [inst]
        key = _group_key(network, inst, node)
        j = i + 1
        while j < len(insts):
            nxt = insts[j]
            if nxt.kind.name in ("MOVE", "MEASURE", "RESET") or nxt.condition:
                break
            nxt_node = _operand_node(network, nxt)
            if _group_key(network, nxt, nxt_node) != key:
                break
            group.append(nxt)
            j += 1
        network.run_session(node, group, block=inst.block)
        i = j
    return transcript, bits


def _operand_node(network: Network, inst: Instruction) -> str:
    nodes = {network.node_of(q) for q in inst.targets}
    if len(nodes) != 1:
        raise NetworkError(
            f"gate {inst.kind} operands span nodes {sorted(nodes)}")
    return nodes.pop()


def _group_key(network: Network, inst: Instruction, node: str):
    if inst.block is not None:
        return ("block", inst.block)
    remote = frozenset(q for q, _ in inst.controls
                       if network.node_of(q) != node)
    return ("adhoc", node, remote)
