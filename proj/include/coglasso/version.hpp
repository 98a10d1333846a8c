#ifndef COGLASSO_VERSION_HPP
#define COGLASSO_VERSION_HPP

namespace coglasso {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
