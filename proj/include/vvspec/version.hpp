// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace vvspec {
inline constexpr const char* toolkit_version = "0.1.0";
}
