use alloc::collections::BTreeSet;
use alloc::string::String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum ConceptValue {
    Yes,
    No,
    #[default]
    Any,
}

impl ConceptValue {
    pub fn as_str(self) -> &'static str {
        match self {
            ConceptValue::Yes => "yes",
            ConceptValue::No => "no",
            ConceptValue::Any => "any",
        }
    }

    pub fn parse(s: &str) -> Option<ConceptValue> {
        match s {
            "yes" => Some(ConceptValue::Yes),
            "no" => Some(ConceptValue::No),
            "any" => Some(ConceptValue::Any),
            _ => None,
        }
    }
}

/// The three message parts a contract can constrain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKey {
    Hdr,
    Pl,
    Attch,
}

impl ElementKey {
    pub const ALL: [ElementKey; 3] = [ElementKey::Hdr, ElementKey::Pl, ElementKey::Attch];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKey::Hdr => "hdr",
            ElementKey::Pl => "pl",
            ElementKey::Attch => "attch",
        }
    }
}

/// Data elements of one message part.
///
/// `Any` on an inbound contract places no requirement on the part. On an
/// outbound contract it means "whatever arrived is passed on", which lets
/// pass-through patterns sit in front of consumers with concrete needs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum ElementSet {
    #[default]
    Any,
    Exactly(BTreeSet<String>),
}

impl ElementSet {
    pub fn of<I, S>(elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ElementSet::Exactly(elements.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        ElementSet::Exactly(BTreeSet::new())
    }

    pub fn as_set(&self) -> Option<&BTreeSet<String>> {
        match self {
            ElementSet::Any => None,
            ElementSet::Exactly(s) => Some(s),
        }
    }

    pub fn is_any(&self) -> bool {
        matches!(self, ElementSet::Any)
    }
}

/// Inbound or outbound pattern contract.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Contract {
    pub signed: ConceptValue,
    pub encrypted: ConceptValue,
    pub encoded: ConceptValue,
    pub hdr: ElementSet,
    pub pl: ElementSet,
    pub attch: ElementSet,
}

impl Contract {
    /// All concepts `any`, all parts unconstrained.
    pub fn any() -> Self {
        Contract::default()
    }

    pub fn concepts(&self) -> [ConceptValue; 3] {
        [self.signed, self.encrypted, self.encoded]
    }

    pub fn element(&self, key: ElementKey) -> &ElementSet {
        match key {
            ElementKey::Hdr => &self.hdr,
            ElementKey::Pl => &self.pl,
            ElementKey::Attch => &self.attch,
        }
    }

    pub fn element_mut(&mut self, key: ElementKey) -> &mut ElementSet {
        match key {
            ElementKey::Hdr => &mut self.hdr,
            ElementKey::Pl => &mut self.pl,
            ElementKey::Attch => &mut self.attch,
        }
    }

    pub fn with_concepts(
        mut self,
        signed: ConceptValue,
        encrypted: ConceptValue,
        encoded: ConceptValue,
    ) -> Self {
        self.signed = signed;
        self.encrypted = encrypted;
        self.encoded = encoded;
        self
    }

    pub fn with_element<I, S>(mut self, key: ElementKey, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        *self.element_mut(key) = ElementSet::of(elements);
        self
    }

    pub fn with_header<I, S>(self, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.with_element(ElementKey::Hdr, elements)
    }

    pub fn with_payload<I, S>(self, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.with_element(ElementKey::Pl, elements)
    }

    pub fn with_attachments<I, S>(self, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.with_element(ElementKey::Attch, elements)
    }

    pub(crate) fn has_empty_element(&self) -> bool {
        ElementKey::ALL.iter().any(|&k| {
            self.element(k)
                .as_set()
                .is_some_and(|s| s.iter().any(|e| e.is_empty()))
        })
    }

    /// Every concrete element identifier, tagged with its part.
    pub fn elements(&self) -> BTreeSet<(ElementKey, String)> {
        let mut out = BTreeSet::new();
        for key in ElementKey::ALL {
            if let Some(set) = self.element(key).as_set() {
                out.extend(set.iter().map(|e| (key, e.clone())));
            }
        }
        out
    }
}

/// Whether contract `c` matches the set of predecessor contracts.
///
/// Concepts: every concept `c` fixes must be equal or `any` in each
/// predecessor. Elements: for every part `c` constrains, the required set
/// equals the union of the predecessors' sets; a predecessor passing the
/// part through (`Any`) relaxes equality to "union is a subset".
pub fn match_contracts<'a, I>(c: &Contract, predecessors: I) -> bool
where
    I: IntoIterator<Item = &'a Contract>,
    I::IntoIter: Clone,
{
    let preds = predecessors.into_iter();
    let concepts = c.concepts();
    for (idx, &required) in concepts.iter().enumerate() {
        if required == ConceptValue::Any {
            continue;
        }
        if preds.clone().any(|p| {
            let v = p.concepts()[idx];
            v != required && v != ConceptValue::Any
        }) {
            return false;
        }
    }
    for key in ElementKey::ALL {
        let Some(required) = c.element(key).as_set() else {
            continue;
        };
        let mut union = BTreeSet::new();
        let mut wildcard = false;
        for p in preds.clone() {
            match p.element(key) {
                ElementSet::Any => wildcard = true,
                ElementSet::Exactly(s) => union.extend(s.iter()),
            }
        }
        let ok = if wildcard {
            union.iter().all(|e| required.contains(*e))
        } else {
            union.len() == required.len() && union.iter().all(|e| required.contains(*e))
        };
        if !ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::ConceptValue::*;
    use super::*;
    use alloc::vec;

    fn router_out() -> Contract {
        Contract::any()
            .with_concepts(No, No, Any)
            .with_payload(["ID", "VALUE"])
    }

    fn multicast_in() -> Contract {
        Contract::any()
            .with_concepts(Any, No, Any)
            .with_payload(["ID", "VALUE"])
    }

    #[test]
    fn router_to_multicast_matches() {
        assert!(match_contracts(&multicast_in(), [&router_out()]));
    }

    #[test]
    fn vacuous_concepts_with_union_elements() {
        let a = Contract::any().with_payload(["x"]);
        let b = Contract::any().with_payload(["y"]).with_header(["h"]);
        let c = Contract::any().with_payload(["x", "y"]).with_header(["h"]);
        assert!(match_contracts(&c, [&a, &b]));
        let short = Contract::any().with_payload(["x"]);
        assert!(!match_contracts(&short, [&a, &b]));
    }

    #[test]
    fn direct_concept_violation() {
        let inbound = Contract::any().with_concepts(Any, No, Any);
        let pred = Contract::any().with_concepts(Any, Yes, Any);
        assert!(!match_contracts(&inbound, [&pred]));
    }

    #[test]
    fn encryption_flip_breaks_match() {
        let mut out = router_out();
        out.encrypted = Yes;
        assert!(!match_contracts(&multicast_in(), [&out]));
    }

    #[test]
    fn pass_through_relaxes_to_subset() {
        let pass = Contract::any();
        let req = Contract::any().with_payload(["x"]);
        assert!(match_contracts(&req, [&pass]));
        let producer = Contract::any().with_payload(["z"]);
        assert!(!match_contracts(&req, [&pass, &producer]));
    }

    #[test]
    fn no_predecessors() {
        assert!(match_contracts(&Contract::any().with_concepts(Yes, Yes, Yes), vec![].iter()));
        assert!(!match_contracts(&Contract::any().with_payload(["x"]), vec![].iter()));
    }
}
