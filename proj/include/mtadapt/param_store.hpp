#pragma once

#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtadapt/errors.hpp"
#include "mtadapt/rng.hpp"
#include "mtadapt/tensor.hpp"

namespace mtadapt {

struct ParamEntry {
    std::string name;
    Tensor tensor;
    bool frozen = false;
};

/// Ordered, uniquely named parameter registry. Iteration order is the
/// registration order, which is what makes gradient flattening stable
/// across runs that construct the store the same way.
class ParamStore {
public:
    void add(std::string name, Tensor tensor, bool frozen) {
        if (index_.count(name))
            throw ContractError("param store: duplicate parameter name '" + name + "'");
        index_[name] = entries_.size();
        entries_.push_back({std::move(name), std::move(tensor), frozen});
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Tensor& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end())
            throw ContractError("param store: unknown parameter '" + name + "'");
        return entries_[it->second].tensor;
    }

    const std::vector<ParamEntry>& entries() const { return entries_; }
    std::vector<ParamEntry>& entries() { return entries_; }
    std::size_t size() const { return entries_.size(); }

    void zero_grad() {
        for (auto& e : entries_) e.tensor.zero_grad();
    }

    using NameFilter = std::function<bool(const std::string&)>;

    /// Concatenates the gradients of every selected parameter, row-major,
    /// in registration order. Every selected parameter must have a grad.
    std::vector<double> flatten_gradients(const NameFilter& filter = {}) const {
        std::vector<double> flat;
        flat.reserve(value_count(filter));
        for (const auto& e : entries_) {
            if (filter && !filter(e.name)) continue;
            if (!e.tensor.has_grad())
                throw ContractError("flatten_gradients: parameter '" + e.name + "' has no gradient");
            const auto g = e.tensor.grad();
            flat.insert(flat.end(), g.begin(), g.end());
        }
        return flat;
    }

    std::vector<double> flatten_values(const NameFilter& filter = {}) const {
        std::vector<double> flat;
        flat.reserve(value_count(filter));
        for (const auto& e : entries_) {
            if (filter && !filter(e.name)) continue;
            const auto v = e.tensor.values();
            flat.insert(flat.end(), v.begin(), v.end());
        }
        return flat;
    }

    std::size_t value_count(const NameFilter& filter = {}) const {
        std::size_t total = 0;
        for (const auto& e : entries_)
            if (!filter || filter(e.name)) total += e.tensor.size();
        return total;
    }

    std::size_t trainable_count() const {
        std::size_t total = 0;
        for (const auto& e : entries_)
            if (!e.frozen) total += e.tensor.size();
        return total;
    }

    /// Content hash of selected parameter values; detects any drift.
    std::uint64_t value_hash(const NameFilter& filter = {}) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& e : entries_) {
            if (filter && !filter(e.name)) continue;
            const auto v = e.tensor.values();
            h = fnv1a({reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)}, h);
        }
        return h;
    }

    static NameFilter prefix_filter(std::string prefix) {
        return [prefix = std::move(prefix)](const std::string& name) {
            return name.rfind(prefix, 0) == 0;
        };
    }

private:
    std::vector<ParamEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace mtadapt
