#pragma once
#include <exception>
#include <string>

namespace hkflow::testutil {

// True if fn() throws and the message contains needle.
template <class Fn>
bool throws_containing(Fn&& fn, const std::string& needle) {
    try {
        fn();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

} // namespace hkflow::testutil
