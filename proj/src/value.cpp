#include "polyrpc/value.hpp"

#include <mutex>

namespace polyrpc {

void TypeRegistry::register_type(const std::string& name, TypeInfo info) {
    std::unique_lock lock(mutex_);
    types_.insert_or_assign(name, std::move(info));
}

const TypeInfo* TypeRegistry::find(const std::string& name) const {
    std::shared_lock lock(mutex_);
    auto it = types_.find(name);
    return it == types_.end() ? nullptr : &it->second;
}

bool TypeRegistry::is_dispatchable(const std::string& name) const {
    const TypeInfo* info = find(name);
    return info != nullptr && !info->methods.empty();
}

}  // namespace polyrpc
