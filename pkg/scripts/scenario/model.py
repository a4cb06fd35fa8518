"""
Scenario data model: declared nodes, 1 ms channel frames and metadata.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from dsp.channel import FRAME_PERIOD_MS, ChannelFrame, Link, TapSet
from utils.errors import ScenarioError


@dataclass(frozen=True)
class Mobility:
    speed: float
    waypoints: Tuple[Tuple[float, float, float], ...] = ()


@dataclass(frozen=True)
class Node:
    id: int
    label: str = ""
    position: Optional[Tuple[float, float, float]] = None
    mobility: Optional[Mobility] = None


@dataclass(frozen=True)
class ScenarioMetadata:
    center_frequency: float = 1.0e9
    bandwidth: float = 80.0e6
    duration: float = 0.0
    name: str = ""


@dataclass(frozen=True)
class Scenario:
    """
    Immutable after construction. Every link must reference declared nodes
    and frame timestamps must advance by exactly 1 ms.
    """
    nodes: Tuple[Node, ...]
    frames: Tuple[ChannelFrame, ...]
    metadata: ScenarioMetadata = field(default_factory=ScenarioMetadata)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "frames", tuple(self.frames))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate node id in scenario")
        declared = set(ids)
        for frame in self.frames:
            for tx, rx in frame.links:
                if tx not in declared or rx not in declared:
                    raise ScenarioError(
                        f"frame {frame.timestamp_ms} ms references undeclared link {tx}->{rx}",
                        link=(tx, rx), timestamp_ms=frame.timestamp_ms)
        for prev, cur in zip(self.frames, self.frames[1:]):
            if cur.timestamp_ms - prev.timestamp_ms != FRAME_PERIOD_MS:
                raise ScenarioError(
                    f"frame timestamps must step by {FRAME_PERIOD_MS} ms "
                    f"({prev.timestamp_ms} -> {cur.timestamp_ms})")

    @property
    def node_ids(self) -> List[int]:
        return sorted(n.id for n in self.nodes)

    def node(self, node_id: int) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise ScenarioError(f"node {node_id} not declared", node=node_id)

    def frame(self, index: int) -> ChannelFrame:
        if not 0 <= index < len(self.frames):
            raise ScenarioError(
                f"frame index {index} out of range (scenario has {len(self.frames)} frames)",
                frame_index=index)
        return self.frames[index]

    def taps(self, link: Link, frame_index: int = 0) -> TapSet:
        frame = self.frame(frame_index)
        link = (int(link[0]), int(link[1]))
        if link not in frame.links:
            raise ScenarioError(f"link {link[0]}->{link[1]} absent from frame {frame_index}",
                                link=link)
        return frame.links[link]

    def links(self) -> List[Link]:
        return sorted({link for f in self.frames for link in f.links})


def single_frame_scenario(links: Dict[Link, TapSet], labels: Optional[Sequence[str]] = None,
                          metadata: Optional[ScenarioMetadata] = None) -> Scenario:
    """Convenience constructor: one frame at t = 0, nodes inferred from links."""
    ids = sorted({n for link in links for n in link})
    labels = list(labels or [])
    nodes = tuple(Node(i, labels[k] if k < len(labels) else f"node{i}") for k, i in enumerate(ids))
    return Scenario(nodes=nodes, frames=(ChannelFrame(0, links),),
                    metadata=metadata or ScenarioMetadata(duration=FRAME_PERIOD_MS * 1e-3))
