#pragma once

namespace sigma2lab {

inline constexpr const char* kVersion = "0.1.0";

}
