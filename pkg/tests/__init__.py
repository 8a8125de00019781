"""Tests for AsymConv-toolkit"""
