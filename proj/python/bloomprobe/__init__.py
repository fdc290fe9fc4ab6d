# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The bloomprobe Authors
"""Layer-wise linear probing of Bloom-level structure in LLM activations."""

from ._core import (
    ActivationTensor,
    AlignmentError,
    BoundsError,
    ConfigError,
    Corpus,
    DataError,
    Error,
    FormatError,
    InvalidArgument,
    LEVELS,
    LinearProbe,
    NumericalError,
    ParseError,
    Question,
    TfidfModel,
    UnsupportedVersionError,
    ValidationError,
    __version__,
    balance_downsample,
    centroid_profile,
    class_centroids,
    decode_tensor,
    detect_cso,
    encode_tensor,
    evaluate,
    fit_tfidf,
    length_analysis,
    load_corpus,
    loss_and_grad,
    parse_corpus_delimited,
    parse_corpus_jsonl,
    read_tensor,
    run_pipeline,
    run_text_baseline,
    scan_layers,
    stratified_split,
    tfidf_tokenize,
    train_probe,
    write_tensor,
)
