#pragma once

namespace bcmpc {

inline constexpr const char* kFeatureSchema = "cipg-v1";
inline constexpr const char* kRawFeatureSchema = "raw-v1";
inline constexpr const char* kModelSchema = "bcmpc-model-v1";
inline constexpr const char* kDatasetSchema = "bcmpc-dataset-v1";
inline constexpr const char* kInstanceSchema = "bcmpc-instance-v1";
inline constexpr const char* kReportSchema = "bcmpc-report-v1";
inline constexpr const char* kCheckpointSchema = "bcmpc-checkpoint-v1";

}  // namespace bcmpc
