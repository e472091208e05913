/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <string>

#include "rigidreg/fen.hpp"

namespace rigidreg {

inline constexpr const char* kCheckpointMagic = "rigidreg-fen-v1";

struct Checkpoint {
  FenModel model;
  std::int64_t steps = 0;
  bool has_adam = false;
  AdamState adam;
  std::string extra_json;  // opaque payload, e.g. the training run config
};

/// Container layout: magic line, a JSON header (config, step count, tensor
/// manifest), then the named tensors as little-endian float64 blocks.
/// Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const FenModel& model, std::int64_t steps,
                     const AdamState* adam = nullptr, const std::string& extra_json = "");

Checkpoint load_checkpoint(const std::string& path);

std::string fen_config_to_json(const FenConfig& cfg);
FenConfig fen_config_from_json(const std::string& json_text);

}  // namespace rigidreg
