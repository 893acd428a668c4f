#include "mofkit/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mofkit::ad {

using nlohmann::json;

static constexpr char kMagic[] = "MKCONT1";

const Tensor& Container::get(const std::string& name) const {
  auto it = arrays.find(name);
  if (it == arrays.end())
    throw std::runtime_error("container: missing array '" + name + "'");
  return it->second;
}

void Container::save(const std::string& path) const {
  json header;
  header["magic"] = kMagic;
  header["dtype"] = "float64";
  header["meta"] = meta;
  json arrs = json::array();
  uint64_t offset = 0;
  for (const auto& [name, t] : arrays) {
    arrs.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", offset}});
    offset += static_cast<uint64_t>(t.size()) * sizeof(double);
  }
  header["arrays"] = arrs;
  const std::string htext = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("container: cannot open '" + tmp + "' for write");
    const uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& [name, t] : arrays) {
      (void)name;
      out.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("container: write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("container: rename failed for '" + path + "'");
}

Container Container::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("container: cannot open '" + path + "'");
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("container: truncated header in '" + path + "'");
  json header = json::parse(htext);
  if (header.value("magic", "") != kMagic)
    throw std::runtime_error("container: bad magic in '" + path + "'");

  Container c;
  if (header.contains("meta"))
    c.meta = header["meta"].get<std::map<std::string, std::string>>();
  for (const auto& a : header["arrays"]) {
    Tensor t(a["rows"].get<int>(), a["cols"].get<int>());
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("container: truncated payload in '" + path + "'");
    c.arrays[a["name"].get<std::string>()] = std::move(t);
  }
  return c;
}

Container checkpoint_pack(const std::vector<Parameter*>& params, const OptimState* opt,
                          uint64_t seed) {
  Container c;
  c.meta["seed"] = std::to_string(seed);
  for (const Parameter* p : params) c.put("param/" + p->name, p->value);
  if (opt) {
    c.meta["optim.kind"] = opt->kind == OptimKind::AdamW ? "adamw" : "adam";
    c.meta["optim.lr"] = std::to_string(opt->lr);
    c.meta["optim.beta1"] = std::to_string(opt->beta1);
    c.meta["optim.beta2"] = std::to_string(opt->beta2);
    c.meta["optim.weight_decay"] = std::to_string(opt->weight_decay);
    c.meta["optim.step"] = std::to_string(opt->step_count);
    for (const auto& [name, t] : opt->m) c.put("optim.m/" + name, t);
    for (const auto& [name, t] : opt->v) c.put("optim.v/" + name, t);
  }
  return c;
}

void checkpoint_unpack(const Container& c, const std::vector<Parameter*>& params,
                       OptimState* opt) {
  for (Parameter* p : params) {
    const Tensor& t = c.get("param/" + p->name);
    if (!t.same_shape(p->value))
      throw std::runtime_error("checkpoint: shape mismatch for '" + p->name + "'");
    p->value = t;
    p->zero_grad();
  }
  if (opt) {
    opt->lr = std::stod(c.meta.at("optim.lr"));
    opt->beta1 = std::stod(c.meta.at("optim.beta1"));
    opt->beta2 = std::stod(c.meta.at("optim.beta2"));
    opt->weight_decay = std::stod(c.meta.at("optim.weight_decay"));
    opt->step_count = std::stol(c.meta.at("optim.step"));
    opt->kind = c.meta.at("optim.kind") == "adamw" ? OptimKind::AdamW : OptimKind::Adam;
    opt->m.clear();
    opt->v.clear();
    for (const auto& [name, t] : c.arrays) {
      if (name.rfind("optim.m/", 0) == 0) opt->m[name.substr(8)] = t;
      if (name.rfind("optim.v/", 0) == 0) opt->v[name.substr(8)] = t;
    }
  }
}

void atomic_write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for write");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed for '" + path + "'");
}

}  // namespace mofkit::ad
