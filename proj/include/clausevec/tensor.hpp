#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clausevec/errors.hpp"

namespace clausevec {

// Dense 2-D tensor. Scalars are (1,1), row vectors (1,k). The scalar type is
// float for benchmark runs and double for tests and gradient checks.
template <class S>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        check_shape(shape_);
        data_.assign(static_cast<size_t>(shape_[0]) * shape_[1], S(0));
    }

    static Tensor zeros(int rows, int cols) { return Tensor({rows, cols}); }

    static Tensor scalar(S v) {
        Tensor t({1, 1});
        t.data_[0] = v;
        return t;
    }

    static Tensor row(std::vector<S> values) {
        Tensor t;
        t.shape_ = {1, static_cast<int>(values.size())};
        t.data_ = std::move(values);
        return t;
    }

    static Tensor from(std::vector<int> shape, std::vector<S> data) {
        check_shape(shape);
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        if (t.data_.size() != t.size())
            throw ShapeError("tensor data length " + std::to_string(t.data_.size()) +
                             " does not match shape " + t.shape_string());
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rows() const { return shape_.empty() ? 0 : shape_[0]; }
    int cols() const { return shape_.empty() ? 0 : shape_[1]; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    S* data() { return data_.data(); }
    const S* data() const { return data_.data(); }
    S& operator[](size_t i) { return data_[i]; }
    S operator[](size_t i) const { return data_[i]; }
    S& at(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
    S at(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::string shape_string() const {
        if (shape_.empty()) return "()";
        return "(" + std::to_string(shape_[0]) + "," + std::to_string(shape_[1]) + ")";
    }

    bool requires_grad = false;

private:
    static void check_shape(const std::vector<int>& shape) {
        if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0)
            throw ShapeError("tensors are 2-D with non-negative dims");
    }

    std::vector<int> shape_;
    std::vector<S> data_;
};

}  // namespace clausevec
