//! Wengert-list tape for reverse-mode differentiation.
//!
//! Every forward operation appends one node holding its output value, the
//! nodes it read, and a [`Backward`] rule. [`Graph::backward`] walks the
//! list from the end, so operations are visited in exact reverse order of
//! recording, which is a reverse topological order by construction.

use std::collections::HashMap;

use super::{Real, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Identifier of a trainable parameter block, stable across graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Vector-Jacobian product of one recorded operation.
pub trait Backward<T: Real> {
    fn name(&self) -> &'static str;

    /// Returns one entry per parent. `needs[i]` is false when parent `i`
    /// does not require a gradient; such entries may be `None`.
    fn backward(
        &self,
        _parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        _grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        Err(Error::NoBackwardRule(self.name()))
    }
}

struct Node<T: Real> {
    value: Tensor<T>,
    parents: Vec<Var>,
    rule: Option<Box<dyn Backward<T>>>,
    requires_grad: bool,
}

/// Gradients produced by one backward pass.
pub struct Gradients<T: Real> {
    by_node: Vec<Option<Tensor<T>>>,
    params: Vec<(ParamId, Var)>,
}

impl<T: Real> Gradients<T> {
    /// Gradient for a node; `None` if the loss does not depend on it.
    pub fn wrt(&self, v: Var) -> Option<&Tensor<T>> {
        self.by_node.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn param(&self, id: ParamId) -> Option<&Tensor<T>> {
        self.params
            .iter()
            .find(|(p, _)| *p == id)
            .and_then(|(_, v)| self.wrt(*v))
    }

    /// Parameter gradients in registration order.
    pub fn params(&self) -> impl Iterator<Item = (ParamId, Option<&Tensor<T>>)> {
        self.params.iter().map(move |(p, v)| (*p, self.wrt(*v)))
    }
}

/// The tape. One graph per forward pass.
pub struct Graph<T: Real> {
    nodes: Vec<Node<T>>,
    params: Vec<(ParamId, Var)>,
    param_lookup: HashMap<ParamId, Var>,
}

impl<T: Real> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Graph<T> {
    pub fn new() -> Self {
        Graph {
            nodes: Vec::new(),
            params: Vec::new(),
            param_lookup: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, node: Node<T>) -> Var {
        self.nodes.push(node);
        Var(self.nodes.len() - 1)
    }

    /// Constant input; no gradient is computed for it.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.push(Node {
            value,
            parents: Vec::new(),
            rule: None,
            requires_grad: false,
        })
    }

    /// Input leaf whose gradient is wanted (used by gradient checks).
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.push(Node {
            value,
            parents: Vec::new(),
            rule: None,
            requires_grad: true,
        })
    }

    /// Registers a parameter. Registering the same id twice returns the
    /// same node, so every use accumulates into one gradient.
    pub fn param(&mut self, id: ParamId, value: &Tensor<T>) -> Var {
        if let Some(&v) = self.param_lookup.get(&id) {
            return v;
        }
        let v = self.input(value.clone());
        self.params.push((id, v));
        self.param_lookup.insert(id, v);
        v
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Appends an operation result. The value is checked for finiteness.
    pub fn record(
        &mut self,
        value: Tensor<T>,
        parents: &[Var],
        rule: Box<dyn Backward<T>>,
    ) -> Result<Var> {
        let value = value.ensure_finite(rule.name())?;
        let requires_grad = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        Ok(self.push(Node {
            value,
            parents: parents.to_vec(),
            rule: Some(rule),
            requires_grad,
        }))
    }

    /// Reverse pass from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        let root = &self.nodes[loss.0];
        if !root.value.is_scalar() {
            return Err(Error::NotScalar(root.value.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::full(root.value.shape().to_vec(), T::one()));

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            let Some(rule) = node.rule.as_ref() else {
                continue;
            };
            if !node.requires_grad {
                continue;
            }
            let Some(grad) = grads[i].take() else {
                continue;
            };
            let parents: Vec<&Tensor<T>> = node
                .parents
                .iter()
                .map(|p| &self.nodes[p.0].value)
                .collect();
            let needs: Vec<bool> = node
                .parents
                .iter()
                .map(|p| self.nodes[p.0].requires_grad)
                .collect();
            let parent_grads = rule.backward(&parents, &node.value, &grad, &needs)?;
            debug_assert_eq!(parent_grads.len(), node.parents.len());
            for ((p, g), need) in node.parents.iter().zip(parent_grads).zip(&needs) {
                let (Some(g), true) = (g, *need) else {
                    continue;
                };
                debug_assert_eq!(g.shape(), self.nodes[p.0].value.shape(), "{}", rule.name());
                match &mut grads[p.0] {
                    Some(acc) => acc.add_assign(&g),
                    slot @ None => *slot = Some(g),
                }
            }
            grads[i] = Some(grad);
        }

        Ok(Gradients {
            by_node: grads,
            params: self.params.clone(),
        })
    }
}
