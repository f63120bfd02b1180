#include "healthyplate/error.hpp"

namespace hplate {

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::Io: return "i/o error";
        case ErrorKind::NoPlate: return "no plate found";
        case ErrorKind::NoFood: return "no food items";
        case ErrorKind::BadDataset: return "bad dataset";
        case ErrorKind::BadModel: return "bad model";
    }
    return "unknown";
}

} // namespace hplate
