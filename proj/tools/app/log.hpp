#pragma once

#include <iostream>
#include <string_view>

namespace protolink::app {

inline void log_line(std::string_view message) { std::cerr << "[protolink] " << message << '\n'; }

} // namespace protolink::app
