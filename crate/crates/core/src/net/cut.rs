use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::io::decimal;

use super::*;

/// Memory state at a slice edge: each variable whose lifeline crosses the
/// edge, bound to the label of the crossing arrow. Messages crossing a side
/// edge are reported under their serial-subscripted port name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCut {
    #[serde(with = "decimal::map")]
    pub variables: BTreeMap<String, i64>,
    #[serde(with = "decimal::map")]
    pub messages: BTreeMap<String, i64>,
}

impl Diagram {
    pub fn state_at_cut(&self, id: SliceId, edge: Edge) -> Result<StateCut, NetError> {
        let slice = self.slice(id)?;
        let mut cut = StateCut::default();
        match edge {
            Edge::Top | Edge::Bottom => {
                let boundary = if edge == Edge::Top {
                    slice.rows.start
                } else {
                    slice.rows.end
                };
                for a in &self.arrows {
                    if a.orientation != Orientation::Vertical {
                        continue;
                    }
                    let (tail, head) = (self.event(a.tail), self.event(a.head));
                    let lifeline = self.lifeline(tail.lifeline);
                    if tail.lifeline != head.lifeline
                        || lifeline.class != LifelineClass::Variable
                        || !slice.columns.contains(lifeline.column)
                    {
                        continue;
                    }
                    let (tr, hr) = (self.row_of(a.tail), self.row_of(a.head));
                    if tr < boundary && boundary <= hr {
                        if let Some(v) = a.value {
                            cut.variables.insert(lifeline.name.clone(), v);
                        }
                    }
                }
            }
            Edge::Left | Edge::Right => {
                for id in self.crossing_arrows(id, edge)? {
                    let a = self.arrow(id);
                    if a.orientation != Orientation::Horizontal {
                        continue;
                    }
                    let tx = self.transaction(self.event(a.tail).transaction);
                    if let (Some(m), Some(v)) = (&tx.message, a.value) {
                        cut.messages.insert(m.port_name(), v);
                    }
                }
            }
            Edge::Internal => return Err(NetError::InvalidEdge { slice: id.0, edge }),
        }
        Ok(cut)
    }
}
