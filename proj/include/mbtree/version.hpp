#ifndef MBTREE_VERSION_HPP
#define MBTREE_VERSION_HPP

namespace mbtree {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mbtree

#endif  // MBTREE_VERSION_HPP
