"""guifusion: model-driven GUI exploration, guided bug reporting, replay,
duplicate detection and developer triaging."""

from .appmodel import (
    AppModel,
    ComponentRecord,
    GuiComponent,
    Screen,
    Transition,
    extract_component_universe,
    parse_app_model,
    relative_location,
    serialize_app_model,
    universe_by_id,
)
from .errors import GuiFusionError, ModelParseError
from .flow import (
    NGramModel,
    Step,
    Suggestion,
    infer_gui_state,
    ngram_score,
    suggest_next,
    train_ngram,
    train_ngram_segments,
)
from .maintenance import (
    SimilarityConfig,
    detect_duplicates,
    report_similarity,
    triage_report,
)
from .reporting import (
    BugReport,
    CrawlStrategy,
    DfsComplete,
    NgramWeighted,
    ReplayResult,
    UniformRandom,
    assemble_report,
    crawl_for_crashes,
    generate_step_sentence,
    render_report,
    replay_report,
)
from .ripper import (
    CrashOutcome,
    EventFlowGraph,
    EventToken,
    GuiState,
    NOOP,
    RipConfig,
    RipResult,
    cold_start,
    execute_event,
    rip,
)
from .screenshots import crop_screenshot, render_screenshot
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "AppModel",
    "BugReport",
    "ComponentRecord",
    "CrashOutcome",
    "CrawlStrategy",
    "DfsComplete",
    "EventFlowGraph",
    "EventToken",
    "GuiComponent",
    "GuiFusionError",
    "GuiState",
    "ModelParseError",
    "NGramModel",
    "NgramWeighted",
    "NOOP",
    "ReplayResult",
    "RipConfig",
    "RipResult",
    "Screen",
    "SimilarityConfig",
    "Step",
    "Store",
    "Suggestion",
    "Transition",
    "UniformRandom",
    "assemble_report",
    "cold_start",
    "crawl_for_crashes",
    "crop_screenshot",
    "detect_duplicates",
    "execute_event",
    "extract_component_universe",
    "generate_step_sentence",
    "infer_gui_state",
    "ngram_score",
    "parse_app_model",
    "relative_location",
    "render_report",
    "render_screenshot",
    "replay_report",
    "report_similarity",
    "rip",
    "serialize_app_model",
    "suggest_next",
    "train_ngram",
    "train_ngram_segments",
    "triage_report",
    "universe_by_id",
]
