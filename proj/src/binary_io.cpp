// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/binary_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace occamllm::io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + tmp + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw FormatError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

}  // namespace occamllm::io
