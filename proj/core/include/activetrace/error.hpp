#pragma once

#include <stdexcept>
#include <string>

namespace activetrace {

/// Base of every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define ACTIVETRACE_DEFINE_ERROR(Name)            \
    class Name : public ::activetrace::Error {     \
    public:                                        \
        using ::activetrace::Error::Error;         \
    }

}  // namespace activetrace
