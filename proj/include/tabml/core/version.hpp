#ifndef TABML_CORE_VERSION_HPP_
#define TABML_CORE_VERSION_HPP_

#include <string_view>

namespace tabml {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace tabml

#endif  // TABML_CORE_VERSION_HPP_
