#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rowlegal {

/**
 * Node storage shared by every ShiftHeap of one solver run. Nodes are indices
 * into one arena so that merging heaps moves no memory and destruction never
 * recurses. Popped nodes are recycled through a free list.
 */
class HeapArena {
public:
    struct Node {
        double key_diff;  // true key minus parent's true key (root: minus heap offset)
        std::int32_t payload;
        std::int32_t left;
        std::int32_t right;
        std::int32_t rank; // null-path length
    };
    static constexpr std::int32_t kNull = -1;

    std::int32_t allocate(double key_diff, std::int32_t payload);
    void release(std::int32_t id);
    void reserve(std::size_t n) { nodes_.reserve(n); }

    Node& operator[](std::int32_t id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& operator[](std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)]; }

private:
    std::vector<Node> nodes_;
    std::int32_t free_head_ = kNull;
};

/**
 * Mergeable max-heap over (coordinate, payload) entries with a constant-time
 * uniform key shift. Keys are stored as differences along root paths plus one
 * root-level offset, so add_offset touches a single accumulator and merge
 * stays logarithmic. Leftist ranks bound the right spine by log2(size + 1).
 *
 * Heaps are owned by a single thread; all heaps passed to merge must share
 * one arena.
 */
class ShiftHeap {
public:
    explicit ShiftHeap(HeapArena& arena) : arena_(&arena) {}

    ShiftHeap(ShiftHeap&& o) noexcept
        : arena_(o.arena_), root_(o.root_), offset_(o.offset_), size_(o.size_) {
        o.root_ = HeapArena::kNull;
        o.size_ = 0;
    }
    ShiftHeap& operator=(ShiftHeap&& o) noexcept;
    ShiftHeap(const ShiftHeap&) = delete;
    ShiftHeap& operator=(const ShiftHeap&) = delete;
    ~ShiftHeap();

    bool empty() const { return root_ == HeapArena::kNull; }
    std::size_t size() const { return size_; }

    void push(double key, std::int32_t payload);

    /** Largest key; throws DomainError when empty. */
    double max_key() const;
    /** Largest key, or `fallback` when empty. */
    double max_key_or(double fallback) const;

    /** Removes and returns a maximum entry; ties pop in unspecified order. */
    std::pair<double, std::int32_t> pop_max();

    /** Adds delta to every stored key. O(1). */
    void add_offset(double delta) { offset_ += delta; }

    /** Multiset union; `other` is drained. O(log(total size)). */
    void merge(ShiftHeap&& other);

    /** Test hook: full traversal checking heap order and leftist ranks. */
    bool validate_structure() const;

private:
    std::int32_t merge_nodes(std::int32_t a, double a_key, std::int32_t b, double b_key,
                             double parent_key);
    void free_subtree(std::int32_t id);

    HeapArena* arena_;
    std::int32_t root_ = HeapArena::kNull;
    double offset_ = 0.0;
    std::size_t size_ = 0;
};

} // namespace rowlegal
