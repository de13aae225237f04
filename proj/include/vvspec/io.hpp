// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
//
// Result emission: RFC-4180 CSV, JSON run manifests carrying the verbatim
// config plus its hash, and a binary container for assembled operators.
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvspec/galerkin.hpp"
#include "vvspec/types.hpp"

namespace vvspec {

// Shortest-width %.17g rendering; round-trips doubles exactly.
std::string fmt_g17(double v);

// RFC-4180: quotes fields containing comma, quote, or newline; LF endings.
std::string csv_escape(const std::string& field);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// FNV-1a over the compact serialization; stable across runs and platforms.
std::uint64_t config_hash(const nlohmann::json& config);

// Manifest skeleton: command, verbatim config, config hash, toolkit version
// and the list of files the command wrote.  Callers add payload fields.
nlohmann::json make_manifest(const std::string& command,
                             const nlohmann::json& config,
                             const std::vector<std::string>& outputs);

void write_json(const std::string& path, const nlohmann::json& j);

// Throws ConfigError naming the file on missing or unparsable input.
nlohmann::json read_json(const std::string& path);

// Binary operator container (little-endian): "VVOP", a length-prefixed JSON
// header (dim, cutoff, eps, flow, form, rows, cols), then row-major
// re/im double pairs.  load_operator validates the magic and the shape.
void save_operator(const std::string& path, const GalerkinOperator& op);
GalerkinOperator load_operator(const std::string& path);

}  // namespace vvspec
