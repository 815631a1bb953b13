#include "rowlegal/shift_heap.hpp"

#include <cmath>

#include "rowlegal/errors.hpp"

namespace rowlegal {

std::int32_t HeapArena::allocate(double key_diff, std::int32_t payload) {
    if (free_head_ != kNull) {
        std::int32_t id = free_head_;
        free_head_ = nodes_[static_cast<std::size_t>(id)].left;
        nodes_[static_cast<std::size_t>(id)] = {key_diff, payload, kNull, kNull, 1};
        return id;
    }
    nodes_.push_back({key_diff, payload, kNull, kNull, 1});
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

void HeapArena::release(std::int32_t id) {
    nodes_[static_cast<std::size_t>(id)].left = free_head_;
    free_head_ = id;
}

ShiftHeap& ShiftHeap::operator=(ShiftHeap&& o) noexcept {
    if (this != &o) {
        free_subtree(root_);
        arena_ = o.arena_;
        root_ = o.root_;
        offset_ = o.offset_;
        size_ = o.size_;
        o.root_ = HeapArena::kNull;
        o.size_ = 0;
    }
    return *this;
}

ShiftHeap::~ShiftHeap() { free_subtree(root_); }

void ShiftHeap::free_subtree(std::int32_t id) {
    // Iterative; left spines can be linear in size, so no recursion here.
    if (id == HeapArena::kNull) return;
    std::vector<std::int32_t> stack{id};
    while (!stack.empty()) {
        const std::int32_t cur = stack.back();
        stack.pop_back();
        const std::int32_t l = (*arena_)[cur].left;
        const std::int32_t r = (*arena_)[cur].right;
        if (l != HeapArena::kNull) stack.push_back(l);
        if (r != HeapArena::kNull) stack.push_back(r);
        arena_->release(cur);
    }
}

std::int32_t ShiftHeap::merge_nodes(std::int32_t a, double a_key, std::int32_t b, double b_key,
                                    double parent_key) {
    if (a == HeapArena::kNull && b == HeapArena::kNull) return HeapArena::kNull;
    if (a == HeapArena::kNull) {
        (*arena_)[b].key_diff = b_key - parent_key;
        return b;
    }
    if (b == HeapArena::kNull) {
        (*arena_)[a].key_diff = a_key - parent_key;
        return a;
    }
    if (a_key < b_key) {
        std::swap(a, b);
        std::swap(a_key, b_key);
    }
    HeapArena::Node& na = (*arena_)[a];
    const double right_key = na.right == HeapArena::kNull ? 0.0 : a_key + (*arena_)[na.right].key_diff;
    na.right = merge_nodes(na.right, right_key, b, b_key, a_key);
    const std::int32_t l = na.left, r = na.right;
    const std::int32_t lrank = l == HeapArena::kNull ? 0 : (*arena_)[l].rank;
    const std::int32_t rrank = r == HeapArena::kNull ? 0 : (*arena_)[r].rank;
    if (lrank < rrank) std::swap(na.left, na.right);
    na.rank = std::min(lrank, rrank) + 1;
    na.key_diff = a_key - parent_key;
    return a;
}

void ShiftHeap::push(double key, std::int32_t payload) {
    const std::int32_t node = arena_->allocate(0.0, payload);
    const double root_key = root_ == HeapArena::kNull ? 0.0 : (*arena_)[root_].key_diff + offset_;
    root_ = merge_nodes(root_, root_key, node, key, offset_);
    ++size_;
}

double ShiftHeap::max_key() const {
    if (root_ == HeapArena::kNull) throw DomainError("max of an empty heap");
    return (*arena_)[root_].key_diff + offset_;
}

double ShiftHeap::max_key_or(double fallback) const {
    return root_ == HeapArena::kNull ? fallback : (*arena_)[root_].key_diff + offset_;
}

std::pair<double, std::int32_t> ShiftHeap::pop_max() {
    if (root_ == HeapArena::kNull) throw DomainError("pop of an empty heap");
    const HeapArena::Node n = (*arena_)[root_];
    const double key = n.key_diff + offset_;
    const double lk = n.left == HeapArena::kNull ? 0.0 : key + (*arena_)[n.left].key_diff;
    const double rk = n.right == HeapArena::kNull ? 0.0 : key + (*arena_)[n.right].key_diff;
    arena_->release(root_);
    root_ = merge_nodes(n.left, lk, n.right, rk, offset_);
    --size_;
    return {key, n.payload};
}

void ShiftHeap::merge(ShiftHeap&& other) {
    if (other.root_ == HeapArena::kNull) return;
    const double ok = (*other.arena_)[other.root_].key_diff + other.offset_;
    const double mk = root_ == HeapArena::kNull ? 0.0 : (*arena_)[root_].key_diff + offset_;
    root_ = merge_nodes(root_, mk, other.root_, ok, offset_);
    size_ += other.size_;
    other.root_ = HeapArena::kNull;
    other.size_ = 0;
}

namespace {

struct Walk {
    const HeapArena* arena;
    bool ok = true;
    std::size_t count = 0;

    std::int32_t check(std::int32_t id) { // returns rank
        if (id == HeapArena::kNull) return 0;
        ++count;
        const HeapArena::Node& n = (*arena)[id];
        // Children hang below their parent, so their key differences are non-positive.
        if (n.left != HeapArena::kNull && (*arena)[n.left].key_diff > 0.0) ok = false;
        if (n.right != HeapArena::kNull && (*arena)[n.right].key_diff > 0.0) ok = false;
        const std::int32_t lr = check(n.left);
        const std::int32_t rr = check(n.right);
        if (lr < rr) ok = false;
        if (n.rank != rr + 1) ok = false;
        return n.rank;
    }
};

} // namespace

bool ShiftHeap::validate_structure() const {
    Walk w{arena_};
    w.check(root_);
    return w.ok && w.count == size_;
}

} // namespace rowlegal
