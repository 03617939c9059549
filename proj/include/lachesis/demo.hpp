#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lachesis/advisor.hpp"

namespace lachesis::demo {

// Three-way Reddit join: comments/authors/subreddits scans feeding a
// shared Join through per-dataset join anchors. The comments side carries
// the merged conditional key projection.
IrGraph reddit_consumer();

// Loader that materializes the comments dataset.
IrGraph comments_producer();

struct DemoResult {
    Recommendation recommendation;
    std::vector<JoinVerdict> verdicts;
    std::vector<double> reward_curve;
    std::string candidate_signature;
};

// End-to-end pipeline: ingest history, train against latency-table replay,
// recommend a scheme for the comments dataset, and consult the consumer.
DemoResult run_demo(int epochs, std::uint64_t seed, int k = kDefaultTopK);

std::string demo_to_json(const DemoResult& result);

}  // namespace lachesis::demo
