from .committee import Committee, vote_entropy  # noqa: F401
from .session import (  # noqa: F401
    Budget,
    LearningSession,
    QueryBatch,
    SessionConfig,
    incorporate_labels,
    init_session,
    learning_curve,
    load_session,
    random_baseline_select,
    run_session,
    select_batch,
)
