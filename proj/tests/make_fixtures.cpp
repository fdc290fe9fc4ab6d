// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

// Writes a small synthetic corpus, two activation files and an embedding
// file into the directory given as the only argument.

#include <filesystem>
#include <iostream>

#include "test_util.hpp"

namespace bt = bloomprobe::testing;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <dir>\n";
        return 1;
    }
    const std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir);
    const auto labels = bt::round_robin_labels(12, 6);
    bt::write_corpus_jsonl(dir / "corpus.jsonl", bt::cue_corpus(labels));
    bloomprobe::write_tensor(bt::planted_tensor(labels, 5, 2, 8, 6.0, 1, "toy-a"), dir / "a.actv");
    bloomprobe::write_tensor(bt::planted_tensor(labels, 4, 1, 8, 6.0, 2, "toy-b"), dir / "b.actv");
    bloomprobe::write_tensor(bt::planted_tensor(labels, 1, 0, 6, 4.0, 3, "embedder"), dir / "emb.actv");
    return 0;
}
