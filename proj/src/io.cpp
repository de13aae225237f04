// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "vvspec/version.hpp"

namespace vvspec {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path, std::ios::binary);  // binary keeps LF on all hosts
  if (!f) throw ConfigError("cannot open for writing: " + path);
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) f << ',';
    f << csv_escape(header[i]);
  }
  f << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw ConfigError("csv row width does not match header: " + path);
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << csv_escape(row[i]);
    }
    f << '\n';
  }
  if (!f) throw ConfigError("write failed: " + path);
}

std::uint64_t config_hash(const nlohmann::json& config) {
  return fnv1a64(config.dump());
}

nlohmann::json make_manifest(const std::string& command,
                             const nlohmann::json& config,
                             const std::vector<std::string>& outputs) {
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  nlohmann::json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = hex;
  m["toolkit_version"] = toolkit_version;
  m["outputs"] = outputs;
  return m;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
  if (!f) throw ConfigError("write failed: " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

namespace {

void put_u64(std::ofstream& f, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  f.write(buf, 8);
}

std::uint64_t get_u64(std::ifstream& f) {
  char buf[8];
  f.read(buf, 8);
  std::uint64_t v = 0;
  std::memcpy(&v, buf, 8);
  return v;
}

}  // namespace

void save_operator(const std::string& path, const GalerkinOperator& op) {
  nlohmann::json header;
  header["dim"] = op.modes->dim();
  header["cutoff"] = op.modes->cutoff();
  header["eps"] = op.eps;
  header["flow"] = op.flow_name;
  header["form"] = op.form;
  header["rows"] = op.mat.rows();
  header["cols"] = op.mat.cols();
  const std::string h = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f.write("VVOP", 4);
  put_u64(f, h.size());
  f.write(h.data(), static_cast<std::streamsize>(h.size()));
  std::vector<double> buf(2 * static_cast<size_t>(op.mat.cols()));
  for (Eigen::Index i = 0; i < op.mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < op.mat.cols(); ++j) {
      buf[2 * static_cast<size_t>(j)] = op.mat(i, j).real();
      buf[2 * static_cast<size_t>(j) + 1] = op.mat(i, j).imag();
    }
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  if (!f) throw ConfigError("write failed: " + path);
}

GalerkinOperator load_operator(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "VVOP", 4) != 0) {
    throw ConfigError("not an operator container: " + path);
  }
  const std::uint64_t hlen = get_u64(f);
  if (!f || hlen > (1u << 20)) {
    throw ConfigError("corrupt operator header: " + path);
  }
  std::string h(hlen, '\0');
  f.read(h.data(), static_cast<std::streamsize>(hlen));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("corrupt operator header in " + path + ": " + e.what());
  }

  GalerkinOperator op;
  op.modes = std::make_shared<const ModeSet>(header.at("dim").get<int>(),
                                             header.at("cutoff").get<int>());
  op.eps = header.at("eps").get<double>();
  op.flow_name = header.at("flow").get<std::string>();
  op.form = header.at("form").get<std::string>();
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  const Eigen::Index expect = op.form == "vorticity"
                                  ? op.modes->mode_count()
                                  : op.modes->dimension();
  if (rows != cols || rows != expect) {
    throw ConfigError("operator shape does not match its ModeSet: " + path);
  }
  op.mat.resize(rows, cols);
  std::vector<double> buf(2 * static_cast<size_t>(cols));
  for (Eigen::Index i = 0; i < rows; ++i) {
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!f) throw ConfigError("truncated operator container: " + path);
    for (Eigen::Index j = 0; j < cols; ++j) {
      op.mat(i, j) = cx(buf[2 * static_cast<size_t>(j)],
                        buf[2 * static_cast<size_t>(j) + 1]);
    }
  }
  return op;
}

}  // namespace vvspec
