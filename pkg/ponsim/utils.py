## Copyright (c) 2023-2026, the ponsim developers
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions are met:
#
# 1. Redistributions of source code must retain the above copyright notice, this
#    list of conditions and the following disclaimer.
#
# 2. Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.
#
# 3. Neither the name of the copyright holder nor the names of its
#    contributors may be used to endorse or promote products derived from
#   this software without specific prior written permission.
#
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS"
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE
# DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE
# FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL
# DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR
# SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER
# CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY,
# OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE
# OF THIS SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

"""Shared helpers: validation reports, parameter defaults and graph drawing."""
import copy
import numbers
import re
from collections import OrderedDict

from .ponsim_exceptions import *

KIND_COLORS = {
    'server': '#8fbc8f',
    'gateway-server': '#2e8b57',
    'electronic-switch': '#d3d3d3',
    'media-converter': '#f5deb3',
    'onu': '#87cefa',
    'olt': '#1e90ff',
    'coupler': '#dda0dd',
    'awgr': '#ba55d3',
    'wdm-core-node': '#ff8c00',
    'endpoint-host': '#cd5c5c',
}


class ValidationReport(object):
    """Outcome of a validation pass.

    Each named check maps to the list of offending element ids. A check with an
    empty list passed.

    Attributes
    ----------
    subject: str
        What was validated, e.g. ``topology`` or ``address plan``
    checks: OrderedDict
        Check name to list of offending element ids
    """

    def __init__(self, subject, check_names=()):
        self.subject = subject
        self.checks = OrderedDict((name, []) for name in check_names)

    def fail(self, check, element):
        """Records ``element`` as a failure of ``check``."""
        self.checks.setdefault(check, [])
        if element not in self.checks[check]:
            self.checks[check].append(element)

    @property
    def passed(self):
        return all(not failures for failures in self.checks.values())

    @property
    def failures(self):
        """List of (check, element) pairs in check order."""
        return [(check, el) for check, failures in self.checks.items() for el in failures]

    def failed_checks(self):
        return [check for check, failures in self.checks.items() if failures]

    def merge(self, other):
        merged = ValidationReport(self.subject + " + " + other.subject)
        for report in (self, other):
            for check, failures in report.checks.items():
                merged.checks.setdefault(check, [])
                for el in failures:
                    merged.fail(check, el)
        return merged

    def __bool__(self):
        return self.passed

    def __str__(self):
        lines = ["Validation of {}: {}".format(self.subject, "PASS" if self.passed else "FAIL")]
        for check, failures in self.checks.items():
            if failures:
                lines.append("  FAIL {}: {}".format(check, ", ".join(str(el) for el in failures)))
            else:
                lines.append("  ok   {}".format(check))
        return "\n".join(lines) + "\n"


def set_defaults(params, defaults, section=""):
    '''Returns a copy of ``params`` with every missing key filled from ``defaults``.

    Parameters
    ----------
    params: dict or None
        User supplied values
    defaults: dict
        Allowed keys and their default values
    section: str, optional
        Name used in error messages

    Returns
    -------
    filled: dict
        New dictionary holding exactly the keys of ``defaults``

    Raises
    ------
    PonSimParameterException
        ``params`` is not a mapping or holds a key not present in ``defaults``
    '''
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise PonSimParameterException("Section '{}' must be a mapping.".format(section))
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise PonSimParameterException("Unknown key(s) in '{}': {}".format(section, ", ".join(map(str, unknown))))
    filled = copy.deepcopy(defaults)
    filled.update(params)
    return filled


def natural_key(name):
    """Sort key ordering ``r2`` before ``r10``."""
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r'(\d+)', str(name))]


def validate_count(name, value, minimum=1):
    ''' Checks that a builder count is an integer no smaller than ``minimum``.
    '''
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise PonSimParameterException("{} must be an integer, got {!r}.".format(name, value))
    if value < minimum:
        raise PonSimParameterException("{} must be >= {}, got {}.".format(name, minimum, value))
    return int(value)


def draw_mpl_graph(G, dest, title=""):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import networkx as nx
    pos = nx.spring_layout(G, seed=3113794652)
    fig, ax = plt.subplots(figsize=(10, 8))
    down = [(u, v) for u, v, d in G.edges(data=True) if d.get('down')]
    up = [(u, v) for u, v, d in G.edges(data=True) if not d.get('down')]
    nx.draw_networkx_edges(G, pos, edgelist=up, alpha=0.4, ax=ax)
    nx.draw_networkx_edges(G, pos, edgelist=down, style='dashed', edge_color='red', ax=ax)
    colors = [KIND_COLORS.get(G.nodes[n].get('kind'), '#ffffff') for n in G.nodes()]
    nx.draw_networkx_nodes(G, pos, node_color=colors, node_size=180, ax=ax)
    nx.draw_networkx_labels(G, pos, font_size=6, ax=ax)
    if title:
        ax.set_title(title)
    ax.axis('off')
    fig.savefig(dest, dpi=150, bbox_inches='tight')
    plt.close(fig)
