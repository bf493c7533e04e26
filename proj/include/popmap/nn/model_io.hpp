#pragma once

#include <filesystem>

#include "popmap/nn/feedback.hpp"
#include "popmap/nn/segnet.hpp"

namespace popmap::nn {

// Versioned binary weights: magic "SMV1", kind, input size, channel list,
// explicit layer records (type/cin/cout/kernel), then all parameters as
// little-endian 64-bit floats in declaration order.
inline constexpr std::uint32_t kModelKindSegNet = 1;
inline constexpr std::uint32_t kModelKindFeedback = 2;

void save_model(const SegNetModel& m, const std::filesystem::path& path);
void save_model(const FeedbackModel& m, const std::filesystem::path& path);

SegNetModel load_segnet(const std::filesystem::path& path);
FeedbackModel load_feedback(const std::filesystem::path& path);

// Reads just the kind field (for dispatch and error messages).
std::uint32_t peek_model_kind(const std::filesystem::path& path);

}  // namespace popmap::nn
