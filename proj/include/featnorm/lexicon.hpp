#ifndef FEATNORM_LEXICON_HPP
#define FEATNORM_LEXICON_HPP

#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "featnorm/model.hpp"
#include "featnorm/text.hpp"

namespace featnorm {

// Closed-class word lists driving the normalization rules. Sets overlap only
// where English does (copulas are also in the verb list, "that" is both a
// subordinator and a determiner).
struct ClosedClassLexicon {
  std::set<std::string> pronouns;
  std::set<std::string> qualifier_adverbs;
  std::set<std::string> subordinators;
  std::set<std::string> coordinators;
  std::set<std::string> determiners;
  std::set<std::string> copulas;
  std::set<std::string> adjectives;
  std::set<std::string> nouns;
  // Surface sensibleness gate: a feature must contain at least one of these.
  std::set<std::string> verbs;

  bool is_function_word(const std::string& w) const {
    return pronouns.count(w) || qualifier_adverbs.count(w) || subordinators.count(w) ||
           coordinators.count(w) || determiners.count(w) || copulas.count(w);
  }
};

// Word -> synset ids ordered most-frequent-first, plus the reverse map.
class SynsetLexicon {
 public:
  void add(const std::string& word, const std::vector<std::string>& synset_ids) {
    auto& list = senses_[word];
    for (const auto& id : synset_ids) {
      bool seen = false;
      for (const auto& have : list) {
        if (have == id) { seen = true; break; }
      }
      if (!seen) {
        list.push_back(id);
        members_[id].insert(word);
      }
    }
  }

  const std::vector<std::string>* senses(const std::string& word) const {
    auto it = senses_.find(word);
    return it == senses_.end() ? nullptr : &it->second;
  }

  const std::string* top_synset(const std::string& word) const {
    auto* s = senses(word);
    return (s && !s->empty()) ? &s->front() : nullptr;
  }

  const std::set<std::string>* synset_members(const std::string& id) const {
    auto it = members_.find(id);
    return it == members_.end() ? nullptr : &it->second;
  }

  bool empty() const { return senses_.empty(); }
  const std::map<std::string, std::vector<std::string>>& words() const { return senses_; }

 private:
  std::map<std::string, std::vector<std::string>> senses_;
  std::map<std::string, std::set<std::string>> members_;
};

// Words are synonyms exactly when both are listed and their most frequent
// synsets coincide.
inline bool are_synonyms(const std::string& w1, const std::string& w2,
                         const SynsetLexicon& lex) {
  const std::string* a = lex.top_synset(w1);
  const std::string* b = lex.top_synset(w2);
  return a && b && *a == *b;
}

// Sectioned word-list format: "[section]" headers, one word per line,
// "#" starts a comment.
inline ClosedClassLexicon parse_closed_class(std::istream& in) {
  ClosedClassLexicon lex;
  std::map<std::string, std::set<std::string>*> sections = {
      {"pronouns", &lex.pronouns},
      {"qualifier_adverbs", &lex.qualifier_adverbs},
      {"subordinators", &lex.subordinators},
      {"coordinators", &lex.coordinators},
      {"determiners", &lex.determiners},
      {"copulas", &lex.copulas},
      {"adjectives", &lex.adjectives},
      {"nouns", &lex.nouns},
      {"verbs", &lex.verbs},
  };
  std::set<std::string>* current = nullptr;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string word = trim(line);
    if (word.empty()) continue;
    if (word.front() == '[' && word.back() == ']') {
      auto name = word.substr(1, word.size() - 2);
      auto it = sections.find(name);
      if (it == sections.end()) throw ParseError("unknown section header [" + name + "]", line_no);
      current = it->second;
      continue;
    }
    if (!current) throw ParseError("word before any [section] header", line_no);
    current->insert(to_lower(word));
  }
  return lex;
}

inline ClosedClassLexicon parse_closed_class_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_closed_class(in);
}

namespace detail {

// Simplified TSV: word<TAB>synset_id_1;synset_id_2;...
inline void parse_synset_tsv_line(SynsetLexicon& lex, const std::string& line, long line_no) {
  auto tab = line.find('\t');
  if (tab == std::string::npos) throw ParseError("expected word<TAB>synset list", line_no);
  std::string word = to_lower(trim(line.substr(0, tab)));
  std::string rest = trim(line.substr(tab + 1));
  if (word.empty() || rest.empty()) throw ParseError("empty word or synset list", line_no);
  std::vector<std::string> ids;
  for (auto& piece : split(rest, ';')) {
    std::string id = trim(piece);
    if (!id.empty()) ids.push_back(id);
  }
  if (ids.empty()) throw ParseError("empty word or synset list", line_no);
  lex.add(word, ids);
}

// WordNet index.* line: lemma pos synset_cnt p_cnt [ptr...] sense_cnt
// tagsense_cnt offset [offset...]; offsets are ordered most frequent first.
inline void parse_wordnet_index_line(SynsetLexicon& lex, const std::string& line, long line_no) {
  auto fields = split_whitespace(line);
  if (fields.size() < 7) throw ParseError("short WordNet index line", line_no);
  const std::string& lemma = fields[0];
  const std::string& pos = fields[1];
  int synset_cnt = 0, p_cnt = 0;
  try {
    synset_cnt = std::stoi(fields[2]);
    p_cnt = std::stoi(fields[3]);
  } catch (const std::exception&) {
    throw ParseError("bad counts in WordNet index line", line_no);
  }
  const std::size_t offset_start = 4 + static_cast<std::size_t>(p_cnt) + 2;
  if (fields.size() < offset_start + static_cast<std::size_t>(synset_cnt))
    throw ParseError("truncated WordNet index line", line_no);
  std::vector<std::string> ids;
  for (int i = 0; i < synset_cnt; ++i) ids.push_back(pos + fields[offset_start + i]);
  // WordNet uses '_' inside multiword lemmas; our features are space-joined.
  std::string word = to_lower(lemma);
  for (char& c : word) {
    if (c == '_') c = ' ';
  }
  lex.add(word, ids);
}

}  // namespace detail

// Auto-detects the simplified TSV format vs a WordNet-style index file by
// the first content line.
inline SynsetLexicon parse_synset_lexicon(std::istream& in) {
  SynsetLexicon lex;
  std::string line;
  long line_no = 0;
  int mode = 0;  // 0 undecided, 1 tsv, 2 wordnet
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("  ", 0) == 0) continue;  // WordNet license header
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (mode == 0) mode = (line.find('\t') != std::string::npos) ? 1 : 2;
    if (mode == 1) {
      detail::parse_synset_tsv_line(lex, line, line_no);
    } else {
      detail::parse_wordnet_index_line(lex, line, line_no);
    }
  }
  return lex;
}

inline SynsetLexicon parse_synset_lexicon_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_synset_lexicon(in);
}

// ---------------------------------------------------------------------------
// Bundled resources. The closed-class lists below are the default rule
// lexicon; the synset list is a deliberately small sample that covers the
// collapses exercised by the bundled fixtures. Pass a full WordNet index
// file for real corpora.

inline const char* default_closed_class_text() {
  return R"([pronouns]
it
its
they
them
their
he
she
his
her
we
you
i
one
this
these
those

[qualifier_adverbs]
usually
really
typically
often
sometimes
generally
normally
very
quite
rather
mostly
commonly
frequently
occasionally
always
extremely
fairly
somewhat
highly

[subordinators]
which
that
when
if
but

[coordinators]
and

[determiners]
a
an
the
some
any
many
much
most
several
few
each
every
no
both
all
another
that

[copulas]
is
are
was
were
be
been
being

[adjectives]
big
small
large
little
long
short
tall
old
young
new
red
blue
green
yellow
black
white
brown
orange
purple
pink
grey
gray
round
square
flat
sharp
soft
hard
heavy
light
fast
slow
hot
cold
warm
cool
sweet
sour
loud
quiet
bright
dark
shiny
smooth
rough
wild
dangerous
furry
wooden
strong
weak
thin
thick
wet
dry
clean
dirty
tasty
juicy
fresh
common
rare
expensive
cheap
useful
edible

[nouns]
tree
animal
bird
fish
insect
mammal
fruit
vegetable
food
plant
flower
tool
weapon
instrument
vehicle
machine
device
container
building
furniture
clothing
garment
toy
game
material
metal
wood
liquid
object
creature
pet
predator
cat
dog
car
automobile
boat
house
sofa
couch
chair
table
tail
leg
legs
wheel
wheels
wing
wings
feather
feathers
fur
whisker
whiskers
string
strings
key
keys
seat
seats
door
doors
handle
branch
branches
leaf
leaves

[verbs]
is
are
was
were
be
been
being
has
have
had
can
could
will
would
may
might
must
should
does
do
did
comes
grows
grow
lives
live
eats
eat
makes
make
uses
use
used
contains
contain
produces
produce
provides
provide
needs
need
requires
require
flies
fly
swims
swim
runs
run
moves
move
tastes
taste
smells
smell
sounds
sound
feels
feel
looks
look
seems
seem
belongs
belong
consists
consist
holds
hold
carries
carry
keeps
keep
gives
give
helps
help
floats
float
spins
spin
barks
bark
sits
sit
sleeps
sleep
works
work
plays
play
cuts
cut
drives
drive
sails
sail
)";
}

inline const char* bundled_synsets_text() {
  // word<TAB>synset ids, most frequent sense first
  return "car\tcar.n.01;railcar.n.01;cable_car.n.01\n"
         "automobile\tcar.n.01\n"
         "auto\tcar.n.01\n"
         "sofa\tsofa.n.01\n"
         "couch\tsofa.n.01;frame.n.02\n"
         "kitten\tkitten.n.01\n"
         "kitty\tkitten.n.01;pot.n.03\n"
         "boat\tboat.n.01\n"
         "ship\tship.n.01;embark.v.01\n"
         "vehicle\tvehicle.n.01\n"
         "fruit\tfruit.n.01\n"
         "fish\tfish.n.01\n"
         "animal\tanimal.n.01\n"
         "bank\tdepository.n.01;slope.n.01\n"
         "slope\tslope.n.01;incline.v.01\n"
         "depository\tdepository.n.01\n";
}

inline const ClosedClassLexicon& default_closed_class() {
  static const ClosedClassLexicon lex = parse_closed_class_text(default_closed_class_text());
  return lex;
}

inline const SynsetLexicon& bundled_synsets() {
  static const SynsetLexicon lex = parse_synset_lexicon_text(bundled_synsets_text());
  return lex;
}

}  // namespace featnorm

#endif
