use std::collections::BTreeMap;

use crate::lexicon::{SynonymLexicon, Token, TokenSet, Tokenizer};

/// Normalized query terms with their synonyms resolved up front.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Query {
    terms: TokenSet,
    synonyms: BTreeMap<Token, TokenSet>,
}

impl Query {
    pub fn new(terms: TokenSet, lexicon: &SynonymLexicon) -> Self {
        let synonyms = terms
            .iter()
            .filter_map(|t| {
                let syns = lexicon.syn(t);
                (!syns.is_empty()).then(|| (t.clone(), syns.clone()))
            })
            .collect();
        Query { terms, synonyms }
    }

    pub fn parse(text: &str, tokenizer: &Tokenizer, lexicon: &SynonymLexicon) -> Self {
        Query::new(tokenizer.token_set(text), lexicon)
    }

    pub fn terms(&self) -> &TokenSet {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn synonyms_of(&self, term: &Token) -> Option<&TokenSet> {
        self.synonyms.get(term)
    }

    pub fn synonyms(&self) -> &BTreeMap<Token, TokenSet> {
        &self.synonyms
    }

    /// Union of the synonyms of every term.
    pub fn all_synonyms(&self) -> TokenSet {
        self.synonyms.values().flatten().cloned().collect()
    }

    /// Terms plus all their synonyms.
    pub fn expanded(&self) -> TokenSet {
        let mut out = self.terms.clone();
        out.extend(self.all_synonyms());
        out
    }
}
