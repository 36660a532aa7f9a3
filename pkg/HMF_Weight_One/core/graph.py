from typing import Any, Dict, List, Optional, TypedDict

from langgraph.graph import END, StateGraph

from core import pipeline
from core.config import get_settings
from core.ingestion import RunConfig

# --- Graph State Definition ---


class GraphState(TypedDict, total=False):
    """
    Represents the state of a multi-characteristic stability run.

    Attributes:
        config: The validated run configuration.
        jobs: Worker cap for the per-prime reruns.
        rerun: False to stop after the base run.
        inputs: Characters, multiplier and bases over the base ring.
        space: The largest Hecke stable submodule over the base ring.
        exceptional: Primes dividing a recorded Smith pivot.
        rerun_targets: Exceptional primes plus those requested in the config.
        reruns: Outcome of the rerun modulo each target prime.
        eigenforms: Eigenforms keyed by characteristic, 0 for the base run.
        eigen_notes: Eigenform failures and unsplit blocks, for the report.
        report: The final stability report.
    """

    config: RunConfig
    jobs: int
    rerun: bool
    inputs: Any
    space: Any
    exceptional: List[int]
    rerun_targets: List[int]
    reruns: Dict[int, Any]
    eigenforms: Dict[int, List[Any]]
    eigen_notes: List[str]
    report: Any


def rerun_router(state: GraphState) -> str:
    """Reruns only when enabled and there is a prime to rerun at."""
    if state.get("rerun", True) and state.get("rerun_targets"):
        return "rerun"
    return "skip"


def eigen_router(state: GraphState) -> str:
    """Eigenforms are split off when some space is nonzero and the config asks for them."""
    if not state["config"].eigenforms:
        return "report"
    dimensions = [state["space"].rank] + [
        outcome.dimension or 0 for outcome in state.get("reruns", {}).values()
    ]
    return "eigen" if any(dimensions) else "report"


def create_pipeline_graph():
    """
    Creates and compiles the LangGraph for a stability run.
    """
    graph = StateGraph(GraphState)

    graph.add_node("prepare", pipeline.prepare)
    graph.add_node("stabilize", pipeline.stabilize)
    graph.add_node("collect_primes", pipeline.collect_primes)
    graph.add_node("rerun_primes", pipeline.rerun_primes)
    graph.add_node("compute_eigenforms", pipeline.compute_eigenforms)
    graph.add_node("assemble_report", pipeline.assemble_report)

    # Decision point after the reruns, whether or not any happened
    def eigen_decision_node(state: GraphState):
        """A pass-through node to route into eigenform computation."""
        return {}

    graph.add_node("eigen_decision", eigen_decision_node)

    graph.set_entry_point("prepare")
    graph.add_edge("prepare", "stabilize")
    graph.add_edge("stabilize", "collect_primes")
    graph.add_conditional_edges(
        "collect_primes",
        rerun_router,
        {
            "rerun": "rerun_primes",
            "skip": "eigen_decision",
        },
    )
    graph.add_edge("rerun_primes", "eigen_decision")
    graph.add_conditional_edges(
        "eigen_decision",
        eigen_router,
        {
            "eigen": "compute_eigenforms",
            "report": "assemble_report",
        },
    )
    graph.add_edge("compute_eigenforms", "assemble_report")
    graph.add_edge("assemble_report", END)

    app = graph.compile()
    return app


def run_multicharacteristic(config: RunConfig, jobs: Optional[int] = None, rerun: bool = True) -> GraphState:
    """Runs the stability computation over the base ring and reruns it modulo each exceptional prime.

    Returns:
        The final graph state; ``report`` holds the StabilityReport.
    """
    app = create_pipeline_graph()
    initial_state: GraphState = {
        "config": config,
        "jobs": jobs or get_settings().jobs,
        "rerun": rerun,
        "reruns": {},
        "eigenforms": {},
    }
    return app.invoke(initial_state)
