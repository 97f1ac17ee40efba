#pragma once

// Typed access to a toml++ table with strict key checking. Not installed:
// it pulls in the vendored toml++ header.

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <fmt/format.h>
#include <toml.hpp>

#include "latefusion/error.hpp"

namespace latefusion::detail {

class TomlReader
{
public:
    TomlReader(const toml::table &table, std::string path) : table_(table), path_(std::move(path)) {}

    template <typename T>
    void read(std::string_view key, T &out)
    {
        seen_.insert(std::string(key));
        const toml::node *node = table_.get(key);
        if (!node)
            return;
        if constexpr (std::is_same_v<T, bool>) {
            auto v = node->value<bool>();
            if (!v)
                fail(key, "a boolean");
            out = *v;
        } else if constexpr (std::is_same_v<T, std::string>) {
            auto v = node->value<std::string>();
            if (!v)
                fail(key, "a string");
            out = *v;
        } else if constexpr (std::is_integral_v<T>) {
            auto v = node->value<std::int64_t>();
            if (!v || !node->is_integer() || *v < 0)
                fail(key, "a non-negative integer");
            out = static_cast<T>(*v);
        } else {
            auto v = node->value<double>();
            if (!v || !(node->is_integer() || node->is_floating_point()))
                fail(key, "a number");
            out = *v;
        }
    }

    template <std::size_t N>
    void read(std::string_view key, std::array<double, N> &out)
    {
        seen_.insert(std::string(key));
        const toml::node *node = table_.get(key);
        if (!node)
            return;
        const toml::array *arr = node->as_array();
        if (!arr || arr->size() != N)
            fail(key, fmt::format("an array of {} numbers", N));
        for (std::size_t i = 0; i < N; ++i) {
            auto v = (*arr)[i].value<double>();
            if (!v)
                fail(key, fmt::format("an array of {} numbers", N));
            out[i] = *v;
        }
    }

    void read(std::string_view key, std::vector<std::size_t> &out)
    {
        seen_.insert(std::string(key));
        const toml::node *node = table_.get(key);
        if (!node)
            return;
        const toml::array *arr = node->as_array();
        if (!arr)
            fail(key, "an array of positive integers");
        std::vector<std::size_t> values;
        for (const auto &el : *arr) {
            auto v = el.value<std::int64_t>();
            if (!v || !el.is_integer() || *v <= 0)
                fail(key, "an array of positive integers");
            values.push_back(static_cast<std::size_t>(*v));
        }
        out = std::move(values);
    }

    const toml::table *sub(std::string_view key)
    {
        seen_.insert(std::string(key));
        const toml::node *node = table_.get(key);
        if (!node)
            return nullptr;
        if (!node->is_table())
            fail(key, "a table");
        return node->as_table();
    }

    void reject_unknown() const
    {
        for (const auto &[k, v] : table_)
            if (!seen_.contains(std::string(k.str())))
                throw InputError(fmt::format("unknown config key '{}{}'", prefix(), k.str()));
    }

private:
    std::string prefix() const { return path_.empty() ? "" : path_ + "."; }

    [[noreturn]] void fail(std::string_view key, std::string_view expected) const
    {
        throw InputError(fmt::format("config key '{}{}' must be {}", prefix(), key, expected));
    }

    const toml::table &table_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace latefusion::detail
