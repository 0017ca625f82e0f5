#pragma once

#include <cstdio>
#include <string>

namespace landuse::log {

inline bool& verbose() {
    static bool v = false;
    return v;
}

inline void warn(const std::string& msg) {
    std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

inline void info(const std::string& msg) {
    if (verbose()) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

}  // namespace landuse::log
