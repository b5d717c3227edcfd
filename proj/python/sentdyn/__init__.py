from ._sentdyn import (
    ConfigError,
    Corpus,
    DataError,
    Params,
    Post,
    PosteriorDraws,
    SyntheticCorpus,
    Topic,
    UserPosterior,
    UserTimeline,
    bc_kernel,
    build_timelines,
    combine_sentiment,
    first_initiation_pmf,
    fit,
    generate_synthetic,
    homophily_measure,
    joint_histogram,
    linear_kernel,
    mann_whitney_greater,
    negative_days,
    prepare_corpus,
    quantile,
    read_posts,
    run_command,
    topic_homophily,
    wasserstein_1,
)

__all__ = [
    "ConfigError",
    "Corpus",
    "DataError",
    "Params",
    "Post",
    "PosteriorDraws",
    "SyntheticCorpus",
    "Topic",
    "UserPosterior",
    "UserTimeline",
    "bc_kernel",
    "build_timelines",
    "combine_sentiment",
    "first_initiation_pmf",
    "fit",
    "generate_synthetic",
    "homophily_measure",
    "joint_histogram",
    "linear_kernel",
    "mann_whitney_greater",
    "negative_days",
    "prepare_corpus",
    "quantile",
    "read_posts",
    "run_command",
    "topic_homophily",
    "wasserstein_1",
]
