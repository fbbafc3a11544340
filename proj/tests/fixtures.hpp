#pragma once

#include <string>

inline std::string fixtures_dir() { return PIXELRL_FIXTURES_DIR; }
