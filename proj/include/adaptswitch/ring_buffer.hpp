#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace adaptswitch {

/// Fixed-capacity ring buffer addressed by lag: (*this)[0] is the newest
/// element, (*this)[size()-1] the oldest retained one. Pushing into a full
/// buffer drops the oldest element.
template <typename T>
class RingBuffer {
public:
    explicit RingBuffer(std::size_t capacity, const T& fill = T{})
        : data_(capacity == 0 ? 1 : capacity, fill), size_(0) {}

    [[nodiscard]] std::size_t capacity() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
    [[nodiscard]] bool full() const noexcept { return size_ == data_.size(); }

    void push(const T& value) {
        head_ = (head_ + 1) % data_.size();
        data_[head_] = value;
        if (size_ < data_.size()) {
            ++size_;
        }
    }

    [[nodiscard]] const T& operator[](std::size_t lag) const noexcept {
        return data_[(head_ + data_.size() - lag) % data_.size()];
    }

    [[nodiscard]] const T& at(std::size_t lag) const {
        if (lag >= size_) {
            throw std::out_of_range("RingBuffer: lag beyond retained history");
        }
        return (*this)[lag];
    }

    /// Oldest retained element; the one the next push into a full buffer evicts.
    [[nodiscard]] const T& oldest() const { return at(size_ - 1); }

    void clear() noexcept {
        size_ = 0;
        head_ = 0;
    }

private:
    std::vector<T> data_;
    std::size_t size_;
    std::size_t head_ = 0;
};

}  // namespace adaptswitch
