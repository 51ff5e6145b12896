#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "dirate/channel.hpp"
#include "dirate/models.hpp"
#include "dirate/optimality.hpp"

namespace dirate {

using AnyModel = std::variant<MarkovSourceModel, TestChannelModel, JointMarkovModel,
                              ChannelModel, InputPolicy>;

/// "kind" field of a model/measure document without constructing it.
std::string peek_kind(const std::filesystem::path& path);

/// Load any model document, dispatching on "kind". Probabilities are decimal
/// strings (JSON numbers also accepted); absent cells are structural zeros.
/// Row-level validation runs at tolerance 1e-9 and failures name the row.
AnyModel load_model(const std::filesystem::path& path);

MarkovSourceModel load_source(const std::filesystem::path& path);
TestChannelModel load_test_channel(const std::filesystem::path& path);
JointMarkovModel load_joint(const std::filesystem::path& path);
ChannelModel load_channel(const std::filesystem::path& path);
InputPolicy load_policy(const std::filesystem::path& path);

void save_model(const MarkovSourceModel& model, const std::filesystem::path& path);
void save_model(const TestChannelModel& model, const std::filesystem::path& path);
void save_model(const JointMarkovModel& model, const std::filesystem::path& path);
void save_model(const ChannelModel& model, const std::filesystem::path& path);
void save_model(const InputPolicy& model, const std::filesystem::path& path);

using AnyMeasure = std::variant<DistortionTable, CostTable>;

AnyMeasure load_measure(const std::filesystem::path& path);
void save_measure(const DistortionTable& table, const std::filesystem::path& path);
void save_measure(const CostTable& table, const std::filesystem::path& path);

/// Certificate JSON: { "status", "c", "residual", "d0": {cell: value}, "note" }.
/// d0 keys are comma-joined source-cell symbols (empty key for the channel
/// side's single constant).
std::string certificate_to_json(const OptimalityCertificate& cert,
                                const Alphabet& cell_alphabet);

}  // namespace dirate
