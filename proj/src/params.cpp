#include "ecmsense/params.hpp"

namespace ecmsense {

std::size_t param_index(const std::string& name) {
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (name == kParamNames[i]) return i;
    }
    throw InvalidInput("unknown parameter name: " + name);
}

}  // namespace ecmsense
