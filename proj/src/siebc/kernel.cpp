#include "sentdyn/siebc/kernel.hpp"

#include <string>

#include "sentdyn/error.hpp"

namespace sentdyn::siebc {

std::string_view to_string(KernelType k) { return k == KernelType::bounded ? "bounded" : "linear"; }

KernelType parse_kernel(std::string_view name) {
    if (name == "bounded") return KernelType::bounded;
    if (name == "linear") return KernelType::linear;
    throw ConfigError("unknown kernel '" + std::string(name) + "' (expected bounded or linear)");
}

} // namespace sentdyn::siebc
