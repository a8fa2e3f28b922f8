#ifndef ORBCSP_GUARD_ORBCSP_ERROR_HH
#define ORBCSP_GUARD_ORBCSP_ERROR_HH 1

#include <stdexcept>
#include <string>

namespace orbcsp
{
    class Error : public std::runtime_error
    {
    public:
        explicit Error(const std::string & what) :
            std::runtime_error(what)
        {
        }
    };

    /// Malformed input: unknown names, arity mismatches, broken files.
    class InputError : public Error
    {
    public:
        using Error::Error;
    };

    /// An operation was called outside its documented precondition.
    class PreconditionError : public Error
    {
    public:
        using Error::Error;
    };

    /// A configured size or iteration cap was exceeded.
    class CapExceeded : public Error
    {
    public:
        using Error::Error;
    };

    /// An internal post-condition did not hold. Seeing one of these means a bug
    /// or an input that violates a trusted assumption (e.g. homogeneity).
    class PostconditionError : public Error
    {
    public:
        using Error::Error;
    };
}

#endif
