// SPDX-License-Identifier: Apache-2.0
//
// goofloc - multi-fingerprint fusion toolkit for array-based indoor localization
// Copyright (C) 2026 The goofloc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace goofloc
{

    // Failure categories shared by every module. The numeric values are
    // mirrored by the C API status codes.
    enum class error_code : int
    {
        invalid_argument = 2,
        format_error = 3,
        numerical_failure = 4,
        io_error = 5,
        degenerate_geometry = 6,
        degenerate_input = 7,
    };

    class error : public std::runtime_error
    {
    public:
        error(error_code code, const std::string &what)
            : std::runtime_error(what), code_(code) {}

        error_code code() const noexcept { return code_; }

    private:
        error_code code_;
    };

    class invalid_argument : public error
    {
    public:
        explicit invalid_argument(const std::string &what)
            : error(error_code::invalid_argument, what) {}
    };

    // Raised for malformed persisted data; offset is the byte position at
    // which the reader gave up.
    class format_error : public error
    {
    public:
        format_error(const std::string &what, std::uint64_t offset)
            : error(error_code::format_error, what + " (byte offset " + std::to_string(offset) + ")"),
              offset_(offset) {}

        std::uint64_t offset() const noexcept { return offset_; }

    private:
        std::uint64_t offset_;
    };

    class numerical_failure : public error
    {
    public:
        explicit numerical_failure(const std::string &what)
            : error(error_code::numerical_failure, what) {}
    };

    class io_error : public error
    {
    public:
        explicit io_error(const std::string &what)
            : error(error_code::io_error, what) {}
    };

    class degenerate_geometry : public error
    {
    public:
        explicit degenerate_geometry(const std::string &what)
            : error(error_code::degenerate_geometry, what) {}
    };

    class degenerate_input : public error
    {
    public:
        explicit degenerate_input(const std::string &what)
            : error(error_code::degenerate_input, what) {}
    };

} // namespace goofloc
