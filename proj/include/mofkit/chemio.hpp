#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mofkit/geom.hpp"

namespace mofkit::chemio {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VocabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AtomSpec {
  int atomic_number;
  const char* symbol;
  double covalent_radius;  // A
  int max_valence;
  double mass;  // amu
};

// The fixed 17-species vocabulary. He is the virtual anchor marker.
class AtomVocab {
 public:
  static const AtomVocab& instance();

  static constexpr int kSize = 17;
  static constexpr int kAnchorZ = 2;

  const AtomSpec& entry(int index) const { return entries_.at(index); }
  int size() const { return kSize; }
  int index_of_symbol(const std::string& symbol) const;  // throws VocabError
  int index_of_z(int atomic_number) const;               // throws VocabError
  bool is_anchor_index(int index) const { return entries_[index].atomic_number == kAnchorZ; }
  int anchor_index() const { return anchor_index_; }

 private:
  AtomVocab();
  std::array<AtomSpec, kSize> entries_;
  std::map<std::string, int> by_symbol_;
  std::map<int, int> by_z_;
  int anchor_index_ = -1;
};

struct Linker {
  std::vector<int> elements;  // vocab indices
  geom::Points positions;     // cartesian, A
  std::string source_id;

  int size() const { return static_cast<int>(elements.size()); }
  bool is_anchor(int i) const { return AtomVocab::instance().is_anchor_index(elements[i]); }
  std::vector<int> anchor_indices() const;
  int anchor_count() const { return static_cast<int>(anchor_indices().size()); }
  geom::Points anchor_positions() const;
  geom::Vec3 centroid() const { return geom::centroid(positions); }
  void validate() const;  // throws ValidationError
};

// Metal cluster classes (categorical conditioning for the surrogate).
struct MetalClass {
  const char* name;
  const char* principal_symbol;  // written to CIF exports
  double mass;                   // cluster composition mass, amu
};
constexpr int kMetalClassCount = 8;  // last one is "other"
const MetalClass& metal_class(int type_id);
int metal_class_by_name(const std::string& name);  // throws VocabError

struct MetalNode {
  int type_id = 0;
  geom::Vec3 centroid;                  // fractional
  std::vector<geom::Vec3> site_offsets;  // cartesian offsets from centroid
};

struct Bond {
  int linker_index = 0;
  int anchor_index = 0;  // atom index within the linker (must be an anchor)
  int node_index = 0;
  int site_index = 0;
  std::array<int, 3> image_shift{0, 0, 0};
};

struct DecomposedMOF {
  geom::Mat3 lattice;  // rows = cell vectors
  std::vector<MetalNode> metal_nodes;
  std::vector<Linker> linkers;  // cartesian placement
  std::vector<Bond> bonds;

  void validate() const;  // throws ValidationError
  geom::PBCCell cell() const { return geom::PBCCell(lattice); }
  // total mass of linker atoms plus metal cluster compositions, amu
  double framework_mass() const;
};

// ---------------------------------------------------------------------------
// extended XYZ

Linker parse_linker_xyz(const std::string& text);
std::vector<Linker> parse_linkers_multi(const std::string& text);
std::string write_linker_xyz(const Linker& l);
std::string write_linkers_multi(const std::vector<Linker>& ls);

// ---------------------------------------------------------------------------
// CIF subset (P1, one atom_site loop)

struct CifStructure {
  double a = 0, b = 0, c = 0;
  double alpha = 90, beta = 90, gamma = 90;  // degrees
  geom::Mat3 lattice;                        // standard orientation, a along x
  std::vector<std::string> labels;
  geom::Points frac_positions;
  std::vector<std::string> warnings;

  geom::Points cart_positions() const;
};

CifStructure parse_cif_subset(const std::string& text);
std::string write_cif(const DecomposedMOF& m);
std::string write_cif(const CifStructure& s);

// ---------------------------------------------------------------------------
// dataset records (JSON-lines + binary position sidecar)

struct DatasetItem {
  std::string id;
  std::string split;  // "train", "val", ... ; empty = unassigned
  std::variant<Linker, DecomposedMOF> payload;

  bool is_linker() const { return payload.index() == 0; }
  const Linker& linker() const { return std::get<Linker>(payload); }
  const DecomposedMOF& mof() const { return std::get<DecomposedMOF>(payload); }
};

// writes <stem>.jsonl and <stem>.bin
void save_dataset(const std::string& stem, const std::vector<DatasetItem>& items);
std::vector<DatasetItem> load_dataset(const std::string& jsonl_path);

std::string mof_to_json(const DecomposedMOF& m);
DecomposedMOF mof_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// manifest

struct DatasetManifest {
  std::map<std::string, int> split_counts;
  int n_linkers = 0;
  int n_mofs = 0;
  // atoms per linker
  double atoms_mean = 0, atoms_median = 0;
  int atoms_min = 0, atoms_max = 0;
  double atoms_p25 = 0, atoms_p75 = 0, atoms_p90 = 0;
  // per-element atom fraction over all linker atoms, keyed by atomic number
  std::map<int, double> element_ratio;
  std::map<int, long> element_counts;
  // metal cluster class frequencies (over MOF nodes)
  std::map<std::string, long> node_composition;
  // linkers binding k distinct metal nodes (over MOF linkers with bonds)
  std::map<int, long> connectivity_histogram;
  double mean_connectivity = 0;

  std::string to_json() const;
};

DatasetManifest compute_manifest(const std::vector<DatasetItem>& items);

}  // namespace mofkit::chemio
