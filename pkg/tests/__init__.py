"""Tests for critnls"""
