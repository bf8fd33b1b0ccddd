#include "clipscale/error.hpp"

namespace clipscale {

void throw_io(const std::string& what, const std::string& path) {
    throw IoError(what + ": " + path);
}

}  // namespace clipscale
