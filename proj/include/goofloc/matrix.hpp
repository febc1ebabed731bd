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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace goofloc
{
    using cdouble = std::complex<double>;

    // Dense column-major matrix. Element (r, c) lives at r + c * rows.
    template <typename T>
    class matrix
    {
    public:
        matrix() = default;
        matrix(std::size_t rows, std::size_t cols, T fill = T{})
            : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

        std::size_t rows() const noexcept { return rows_; }
        std::size_t cols() const noexcept { return cols_; }
        std::size_t size() const noexcept { return data_.size(); }
        bool empty() const noexcept { return data_.empty(); }

        T &operator()(std::size_t r, std::size_t c) { return data_[r + c * rows_]; }
        const T &operator()(std::size_t r, std::size_t c) const { return data_[r + c * rows_]; }

        // Column c as a contiguous span
        std::span<T> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
        std::span<const T> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

        std::span<T> data() noexcept { return data_; }
        std::span<const T> data() const noexcept { return data_; }

        bool operator==(const matrix &) const = default;

    private:
        std::size_t rows_ = 0;
        std::size_t cols_ = 0;
        std::vector<T> data_;
    };

    using cmatrix = matrix<cdouble>;
    using rmatrix = matrix<double>;

} // namespace goofloc
