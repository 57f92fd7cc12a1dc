#pragma once

#include <iosfwd>
#include <string>

#include "fbdforge/program.hpp"

namespace fbdforge {

// Corpus file: JSON Lines, one `{"id", "symbols", "task"?}` object per line.
// Blank lines are skipped. Without a vocabulary, the vocabulary is the set
// of symbols that occur in the file.
Corpus load_corpus(std::istream& in);
Corpus load_corpus(std::istream& in, const Vocabulary& vocab);
Corpus load_corpus_file(const std::string& path);
Corpus load_corpus_file(const std::string& path, const Vocabulary& vocab);

void write_corpus(std::ostream& out, const Corpus& corpus);
std::string program_to_line(const FbdProgram& program);

// Vocabulary file: JSON array of `{"name", "category"?, "notes"?}`.
Vocabulary load_vocabulary(std::istream& in);
Vocabulary load_vocabulary_file(const std::string& path);
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);

}  // namespace fbdforge
