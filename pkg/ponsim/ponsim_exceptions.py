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

__all__ = [
    'PonSimException', 'PonSimParameterException', 'PonSimSpanException', 'PonSimUnknownLinkException',
    'PonSimUnknownNodeException', 'PonSimUnaddressedNodeException', 'PonSimUnknownKindException',
    'PonSimPrefixExhaustedException', 'PonSimCapacityExceededException', 'PonSimUnreachableSubnetException',
    'PonSimNoRouteException', 'PonSimLoopDetectedException', 'PonSimParseException', 'PonSimExperimentException',
    'InfeasibleWiringWarning'
]


class PonSimException(Exception):
    pass


class PonSimParameterException(PonSimException):
    pass


class PonSimSpanException(PonSimException):
    pass


class PonSimUnknownLinkException(PonSimException):
    pass


class PonSimUnknownNodeException(PonSimException):
    pass


class PonSimUnaddressedNodeException(PonSimException):
    pass


class PonSimUnknownKindException(PonSimException):
    pass


class PonSimPrefixExhaustedException(PonSimException):
    pass


class PonSimCapacityExceededException(PonSimException):

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class PonSimUnreachableSubnetException(PonSimException):
    pass


class PonSimNoRouteException(PonSimException):
    pass


class PonSimLoopDetectedException(PonSimNoRouteException):
    pass


class PonSimParseException(PonSimException):
    pass


class PonSimExperimentException(PonSimException):

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InfeasibleWiringWarning(RuntimeWarning):
    pass
